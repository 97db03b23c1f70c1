#include <gtest/gtest.h>

#include <cmath>

#include "ted_oracle.hpp"
#include "test_util.hpp"
#include "uigen/core/error.hpp"
#include "uigen/ui/markup.hpp"
#include "uigen/ui/similarity.hpp"
#include "uigen/ui/validate.hpp"

using namespace uigen;
using namespace uigen::ui;
using uigen::testing::leaf;

namespace {

const char* kMinimal = "(container device=phone x=0 y=0 w=64 h=64)";
const char* kTwoNode = "(container device=phone x=0 y=0 w=64 h=64 (button x=4 y=4 w=16 h=8 color=2))";

}  // namespace

TEST(Markup, ParsesMinimalTree) {
    const UITree t = parse_markup(kMinimal);
    EXPECT_EQ(t.device, Device::phone);
    EXPECT_EQ(t.root.kind, ComponentKind::container);
    EXPECT_EQ(t.root.rect(), (Rect{0, 0, 64, 64}));
    EXPECT_TRUE(t.root.children.empty());
    EXPECT_EQ(t, empty_tree(Device::phone));
}

TEST(Markup, ParsesSingleNesting) {
    const UITree t = parse_markup(kTwoNode);
    ASSERT_EQ(t.root.children.size(), 1u);
    const UINode& b = t.root.children[0];
    EXPECT_EQ(b.kind, ComponentKind::button);
    EXPECT_EQ(b.rect(), (Rect{4, 4, 16, 8}));
    EXPECT_EQ(b.color, 2);
    EXPECT_EQ(node_count(t), 2);
}

TEST(Markup, TruncatedInputReportsPosition) {
    try {
        parse_markup("(container device=phone x=0 y=0 w=64");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 1u);
        EXPECT_EQ(e.column(), 33u);
        EXPECT_EQ(e.message(), "expected attribute or ')'");
    }
}

TEST(Markup, ErrorsCarryLineAndColumn) {
    try {
        parse_markup("(container device=phone x=0 y=0 w=64 h=64\n  (buton x=1 y=1 w=1 h=1))");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_EQ(e.column(), 4u);
    }
    EXPECT_THROW(parse_markup("(container device=phone x=0 y=0 w=64 h=64 (button x=60 y=0 w=16 h=8))"), RangeError);
    EXPECT_THROW(parse_markup("(container device=phone x=0 y=0 w=64 h=64 (button x=0 y=0 w=8 h=8 color=16))"),
                 RangeError);
    EXPECT_THROW(parse_markup("(button device=phone x=0 y=0 w=64 h=64)"), ParseError);
    EXPECT_THROW(parse_markup("(container device=phone x=0 y=0 w=64 h=64) trailing"), ParseError);
}

TEST(Markup, PrintsCanonicalForm) {
    EXPECT_EQ(print_markup(parse_markup(kMinimal)), std::string(kMinimal) + "\n");
    const std::string two = print_markup(parse_markup(kTwoNode));
    EXPECT_EQ(two,
              "(container device=phone x=0 y=0 w=64 h=64\n"
              "  (button x=4 y=4 w=16 h=8 color=2)\n"
              ")\n");
}

TEST(Markup, WhitespaceInsensitive) {
    const UITree a = parse_markup(kTwoNode);
    const UITree b = parse_markup("  (container\n\tdevice=phone x = 0 y=0\nw=64 h=64(button x=4 y=4 w=16 h=8 color=2)\n)\n");
    EXPECT_EQ(a, b);
}

TEST(Markup, RoundTripsGeneratedCorpus) {
    for (const auto& ex : uigen::testing::small_corpus(1000)) {
        const std::string text = print_markup(ex.tree);
        const UITree back = parse_markup(text);
        ASSERT_EQ(back, ex.tree) << text;
        ASSERT_EQ(print_markup(back), text);
    }
}

TEST(Markup, RoundTripsTextAndDevices) {
    UITree t = empty_tree(Device::desktop);
    auto b = leaf(ComponentKind::label, 2, 3, 10, 4, 7);
    b.text = TextClass::long_text;
    t.root.children.push_back(b);
    auto f = leaf(ComponentKind::form, 20, 20, 30, 30, 5);
    auto inner = leaf(ComponentKind::button, 21, 21, 8, 4, 1);
    inner.text = TextClass::short_text;
    f.children.push_back(inner);
    t.root.children.push_back(f);
    EXPECT_EQ(parse_markup(print_markup(t)), t);
}

TEST(Json, LoadsEmptyPhoneTree) {
    const UITree t = load_json(
        R"({"device":"phone","canvas":{"w":320,"h":320},"root":{"type":"container","x":0,"y":0,"w":320,"h":320,"children":[]}})");
    EXPECT_EQ(t, empty_tree(Device::phone));
}

TEST(Json, MapsPixelsAndSnapsColour) {
    const UITree t = load_json(
        R"({"device":"phone","canvas":{"w":320,"h":320},"root":{"type":"container","x":0,"y":0,"w":320,"h":320,
            "children":[{"type":"button","x":160,"y":0,"w":160,"h":40,"color":"#FF0000"}]}})");
    ASSERT_EQ(t.root.children.size(), 1u);
    const UINode& b = t.root.children[0];
    EXPECT_EQ(b.rect(), (Rect{32, 0, 32, 8}));
    int nearest = 0;
    long best = -1;
    for (int i = 0; i < kPaletteSize; ++i) {
        const Rgb c = kPalette[static_cast<std::size_t>(i)];
        const long d = static_cast<long>(c.r - 255) * (c.r - 255) + static_cast<long>(c.g) * c.g + static_cast<long>(c.b) * c.b;
        if (best < 0 || d < best) {
            best = d;
            nearest = i;
        }
    }
    EXPECT_EQ(b.color, nearest);
}

TEST(Json, ReportsSchemaErrors) {
    try {
        load_json(R"({"root":{"type":"button"}})");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("missing field x"), std::string::npos);
    }
    EXPECT_THROW(load_json(R"({"root":{"type":"container","x":-1,"y":0,"w":64,"h":64}})"), RangeError);
    EXPECT_THROW(load_json(R"({"root": )"), ParseError);
}

TEST(Json, ClampsTinySizesToOneUnit) {
    const UITree t = load_json(
        R"({"canvas":{"w":640,"h":640},"root":{"type":"container","x":0,"y":0,"w":640,"h":640,
            "children":[{"type":"label","x":0,"y":0,"w":3,"h":3}]}})");
    EXPECT_EQ(t.root.children[0].w, 1);
    EXPECT_EQ(t.root.children[0].h, 1);
}

TEST(Json, ExportReloadsExactly) {
    for (const auto& ex : uigen::testing::small_corpus(200)) ASSERT_EQ(load_json(to_json(ex.tree)), ex.tree);
}

TEST(Json, AcceptsArrays) {
    const std::string one = to_json(empty_tree(Device::tablet));
    const auto v = load_json_designs("[" + one + "," + one + "]");
    ASSERT_EQ(v.size(), 2u);
    EXPECT_EQ(v[1].device, Device::tablet);
}

TEST(Palette, FixedEndpoints) {
    EXPECT_EQ(palette_hex(0), "#FFFFFF");
    EXPECT_EQ(palette_hex(1), "#000000");
    for (int i = 0; i < kPaletteSize; ++i) EXPECT_EQ(nearest_palette_index(kPalette[static_cast<std::size_t>(i)]), i);
}

TEST(Validate, GeneratedTreesAreClean) {
    for (const auto& ex : uigen::testing::small_corpus(1000)) ASSERT_TRUE(validate(ex.tree).empty());
}

TEST(Validate, ChildEscapingParent) {
    UITree t = empty_tree(Device::phone);
    auto c = leaf(ComponentKind::container, 0, 0, 32, 32);
    c.children.push_back(leaf(ComponentKind::button, 20, 0, 16, 8));
    t.root.children.push_back(c);
    const auto v = validate(t);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].rule, Rule::child_escapes_parent);
    EXPECT_EQ(v[0].path, (std::vector<int>{0, 0}));
}

TEST(Validate, CanvasOverflowIsAnEscape) {
    UITree t = empty_tree(Device::phone);
    t.root.children.push_back(leaf(ComponentKind::button, 60, 0, 16, 8));
    const auto v = validate(t);
    ASSERT_FALSE(v.empty());
    EXPECT_EQ(v[0].rule, Rule::child_escapes_parent);
}

TEST(Validate, IdenticalSiblingsOverlap) {
    UITree t = empty_tree(Device::phone);
    t.root.children.push_back(leaf(ComponentKind::button, 0, 0, 8, 8));
    t.root.children.push_back(leaf(ComponentKind::button, 0, 0, 8, 8));
    const auto v = validate(t);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].rule, Rule::sibling_overlap);
    EXPECT_EQ(v[0].path, (std::vector<int>{1}));
}

TEST(Validate, TouchingSiblingsDoNotOverlap) {
    UITree t = empty_tree(Device::phone);
    t.root.children.push_back(leaf(ComponentKind::button, 0, 0, 8, 8));
    t.root.children.push_back(leaf(ComponentKind::button, 8, 0, 8, 8));
    EXPECT_TRUE(validate(t).empty());
}

TEST(Validate, DepthAndCountCaps) {
    UITree deep = empty_tree(Device::phone);
    UINode* cur = &deep.root;
    for (int d = 0; d < 6; ++d) {
        cur->children.push_back(leaf(ComponentKind::container, 0, 0, 64, 64));
        cur = &cur->children.back();
    }
    auto v = validate(deep);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].rule, Rule::depth_exceeded);

    UITree wide = empty_tree(Device::phone);
    for (int i = 0; i < 48; ++i) wide.root.children.push_back(leaf(ComponentKind::label, i, 0, 1, 1));
    v = validate(wide);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].rule, Rule::count_exceeded);
    EXPECT_TRUE(v[0].path.empty());
}

TEST(Validate, SingleBreachInjectionsReportTheirRule) {
    Rng rng(5);
    int checked = 0;
    for (const auto& ex : uigen::testing::small_corpus(300, 23)) {
        // Section i, leaf j.
        const UINode& sec = ex.tree.root.children[0];
        if (sec.children.size() < 2) continue;
        {
            UITree t = ex.tree;
            auto& kids = t.root.children[0].children;
            kids[1] = leaf(kids[1].kind, kids[0].x, kids[0].y, kids[0].w, kids[0].h, kids[1].color);
            const auto v = validate(t);
            ASSERT_EQ(v.size(), 1u);
            EXPECT_EQ(v[0].rule, Rule::sibling_overlap);
        }
        {
            UITree t = ex.tree;
            auto& s = t.root.children[0];
            s.w = 1;
            for (const auto& v : validate(t)) EXPECT_EQ(v.rule, Rule::child_escapes_parent);
            EXPECT_EQ(validate(t).size(), s.children.size());
        }
        {
            UITree t = ex.tree;
            t.root.children[0].children[0].color = 99;
            const auto v = validate(t);
            ASSERT_EQ(v.size(), 1u);
            EXPECT_EQ(v[0].rule, Rule::bad_geometry);
        }
        ++checked;
    }
    EXPECT_GT(checked, 50);
    (void)rng;
}

TEST(Similarity, IdentityAndExample) {
    UITree a = empty_tree(Device::phone);
    UITree b = a;
    b.root.children.push_back(leaf(ComponentKind::button, 0, 0, 8, 8));
    EXPECT_EQ(tree_similarity(a, a), 1.0);
    EXPECT_EQ(tree_edit_distance(a.root, b.root), 1);
    EXPECT_NEAR(tree_similarity(a, b), 1.0 - 1.0 / 3.0, 1e-12);
}

TEST(Similarity, MatchesExhaustiveSearchOnSmallTrees) {
    const auto trees = uigen::testing::all_small_trees(4, {ComponentKind::container, ComponentKind::form});
    ASSERT_EQ(trees.size(), 102u);
    for (const auto& a : trees)
        for (const auto& b : trees) ASSERT_EQ(tree_edit_distance(a, b), uigen::testing::brute_force_ted(a, b));
}

TEST(Similarity, SymmetricOnRandomPairs) {
    const auto data = uigen::testing::small_corpus(200, 3);
    for (std::size_t i = 0; i + 1 < data.size(); i += 2) {
        EXPECT_EQ(tree_similarity(data[i].tree, data[i + 1].tree), tree_similarity(data[i + 1].tree, data[i].tree));
    }
    Rng rng(17);
    for (int i = 0; i < 100; ++i) {
        UITree a = empty_tree(Device::phone), b = empty_tree(Device::phone);
        a.root = uigen::testing::random_shape(rng, 12);
        b.root = uigen::testing::random_shape(rng, 12);
        const double s = tree_similarity(a, b);
        EXPECT_EQ(s, tree_similarity(b, a));
        EXPECT_GE(s, 0.0);
        EXPECT_LE(s, 1.0);
    }
}

TEST(Similarity, AddingOneNodeMovesScoreBoundedly) {
    Rng rng(29);
    for (int i = 0; i < 100; ++i) {
        UITree a = empty_tree(Device::phone), b = empty_tree(Device::phone);
        a.root = uigen::testing::random_shape(rng, 10);
        b.root = uigen::testing::random_shape(rng, 10);
        UITree a2 = a;
        a2.root.children.push_back(leaf(ComponentKind::image, 0, 0, 1, 1));
        const double bound = 2.0 / (node_count(a) + node_count(b));
        EXPECT_LE(std::abs(tree_similarity(a2, b) - tree_similarity(a, b)), bound + 1e-12);
    }
}
