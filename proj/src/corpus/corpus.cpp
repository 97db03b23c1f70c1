#include "uigen/corpus/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "uigen/core/error.hpp"
#include "uigen/ui/markup.hpp"

namespace uigen::corpus {

using ui::ComponentKind;
using ui::UINode;
using ui::UITree;

namespace {

constexpr std::array<ComponentKind, 3> kSectionKinds = {ComponentKind::container, ComponentKind::form,
                                                         ComponentKind::navbar};
constexpr std::array<ComponentKind, 7> kLeafKinds = {ComponentKind::button,   ComponentKind::textbox,
                                                      ComponentKind::dropdown, ComponentKind::checkbox,
                                                      ComponentKind::label,    ComponentKind::image,
                                                      ComponentKind::chart};
constexpr int kMaxRowItems = 3;

enum Role { background, surface, accent, ink };

Role role_of(ComponentKind k) {
    switch (k) {
        case ComponentKind::container:
        case ComponentKind::form:
        case ComponentKind::image: return surface;
        case ComponentKind::navbar:
        case ComponentKind::button:
        case ComponentKind::chart: return accent;
        case ComponentKind::label: return ink;
        default: return background;
    }
}

// Theme 2 gives every kind its own hue.
int color_of(ComponentKind k, int theme, bool is_root) {
    static constexpr std::array<std::array<int, 4>, 2> roles = {{{0, 3, 11, 1}, {1, 2, 6, 0}}};
    static constexpr std::array<int, ui::kNumKinds> hues = {3, 8, 12, 4, 7, 9, 10, 13, 14, 5};
    if (is_root) return theme == 1 ? 1 : 0;
    if (theme == 2) return hues[static_cast<std::size_t>(k)];
    return roles[static_cast<std::size_t>(theme)][role_of(k)];
}

ui::TextClass text_of(ComponentKind k) {
    switch (k) {
        case ComponentKind::button:
        case ComponentKind::dropdown:
        case ComponentKind::checkbox: return ui::TextClass::short_text;
        case ComponentKind::label: return ui::TextClass::long_text;
        default: return ui::TextClass::none;
    }
}

int band_height(int sections, int snap) { return ui::kGrid / sections / snap * snap; }

template <std::size_t N>
std::array<double, N> restrict_weights(const std::array<double, ui::kNumKinds>& w,
                                       const std::array<ComponentKind, N>& kinds) {
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = w[static_cast<std::size_t>(kinds[i])];
    return out;
}

}  // namespace

void CorpusConfig::check() const {
    for (double w : kind_weights)
        if (!(w >= 0.0)) throw ConfigError("kind weights must be nonnegative");
    const auto sec = restrict_weights(kind_weights, kSectionKinds);
    const auto leaf = restrict_weights(kind_weights, kLeafKinds);
    auto positive = [](auto& a) { return std::any_of(a.begin(), a.end(), [](double v) { return v > 0.0; }); };
    if (!positive(sec)) throw ConfigError("at least one of container, form, navbar needs positive weight");
    if (!positive(leaf)) throw ConfigError("at least one leaf kind needs positive weight");
    for (double w : device_mix)
        if (!(w >= 0.0)) throw ConfigError("device weights must be nonnegative");
    if (!positive(device_mix)) throw ConfigError("device weights must not all be zero");
    for (double w : theme_mix)
        if (!(w >= 0.0)) throw ConfigError("theme weights must be nonnegative");
    if (!positive(theme_mix)) throw ConfigError("theme weights must not all be zero");
    if (max_children_per_node < 1) throw ConfigError("max_children_per_node must be at least 1");
    if (grid_snap < 1 || grid_snap > 16 || ui::kGrid % grid_snap != 0) {
        throw ConfigError("grid_snap must divide 64 and be at most 16");
    }
    if (!(half_width_prob >= 0.0 && half_width_prob <= 1.0)) throw ConfigError("half_width_prob must lie in [0, 1]");
    if (!(goal_prob >= 0.0 && goal_prob <= 1.0)) throw ConfigError("goal_prob must lie in [0, 1]");
}

codec::DesignSpec spec_of(const UITree& tree, bool responsive, bool accessible) {
    std::array<int, ui::kNumKinds> counts{};
    auto walk = [&](auto&& self, const UINode& n) -> void {
        if (!ui::is_container(n.kind)) ++counts[static_cast<std::size_t>(n.kind)];
        for (const auto& c : n.children) self(self, c);
    };
    walk(walk, tree.root);
    codec::DesignSpec spec;
    spec.device = tree.device;
    spec.responsive = responsive;
    spec.accessible = accessible;
    for (std::size_t k = 0; k < counts.size(); ++k)
        if (counts[k] > 0) spec.required.emplace_back(static_cast<ComponentKind>(k), std::min(counts[k], 8));
    return spec.canonical();
}

bool satisfies(const UITree& tree, const codec::DesignSpec& spec) {
    std::array<int, ui::kNumKinds> counts{};
    auto walk = [&](auto&& self, const UINode& n) -> void {
        ++counts[static_cast<std::size_t>(n.kind)];
        for (const auto& c : n.children) self(self, c);
    };
    walk(walk, tree.root);
    for (const auto& [k, c] : spec.required)
        if (counts[static_cast<std::size_t>(k)] < c) return false;
    return true;
}

train::Example generate_one(const CorpusConfig& cfg, Rng rng) {
    const int s = cfg.grid_snap;
    const auto sec_w = restrict_weights(cfg.kind_weights, kSectionKinds);
    const auto leaf_w = restrict_weights(cfg.kind_weights, kLeafKinds);

    UITree tree;
    tree.device = ui::kAllDevices[rng.weighted(cfg.device_mix)];
    const int theme = static_cast<int>(rng.weighted(cfg.theme_mix));
    const bool half = rng.bernoulli(cfg.half_width_prob);

    int max_sections = 1;
    while (max_sections < 3 && band_height(max_sections + 1, s) >= 3 * s) ++max_sections;
    const int n_sections = rng.range(1, max_sections);
    const int band = band_height(n_sections, s);
    const int width = half ? ui::kGrid / 2 : ui::kGrid;

    tree.root = UINode{ComponentKind::container, 0, 0, ui::kGrid, ui::kGrid, color_of(ComponentKind::container, theme, true),
                       ui::TextClass::none, {}};
    for (int i = 0; i < n_sections; ++i) {
        UINode sec;
        sec.kind = kSectionKinds[rng.weighted(sec_w)];
        sec.x = 0;
        sec.y = i * band;
        sec.w = width;
        sec.h = band;
        sec.color = color_of(sec.kind, theme, false);
        const bool row = sec.kind == ComponentKind::navbar;
        const int capacity = row ? kMaxRowItems : (band - 2 * s) / s;
        const int n_leaves = rng.range(1, std::min(cfg.max_children_per_node, capacity));
        std::vector<ComponentKind> kinds;
        for (int j = 0; j < n_leaves; ++j) kinds.push_back(kLeafKinds[rng.weighted(leaf_w)]);
        std::sort(kinds.begin(), kinds.end());
        const int cell = row ? (width - 2 * s) / n_leaves / s * s : 0;
        for (int j = 0; j < n_leaves; ++j) {
            UINode leaf;
            leaf.kind = kinds[static_cast<std::size_t>(j)];
            if (row) {
                leaf.x = sec.x + s + j * cell;
                leaf.y = sec.y + s;
                leaf.w = cell;
            } else {
                leaf.x = sec.x + s;
                leaf.y = sec.y + s + j * s;
                leaf.w = width - 2 * s;
            }
            leaf.h = s;
            leaf.color = color_of(leaf.kind, theme, false);
            leaf.text = text_of(leaf.kind);
            sec.children.push_back(leaf);
        }
        tree.root.children.push_back(std::move(sec));
    }
    const bool responsive = rng.bernoulli(cfg.goal_prob);
    const bool accessible = rng.bernoulli(cfg.goal_prob);
    return {spec_of(tree, responsive, accessible), std::move(tree)};
}

train::Dataset generate_synthetic(const CorpusConfig& cfg) {
    cfg.check();
    const Rng root(cfg.seed);
    train::Dataset out(cfg.n);
#pragma omp parallel for schedule(static) if (cfg.n >= 256)
    for (std::size_t i = 0; i < cfg.n; ++i) out[i] = generate_one(cfg, root.split(i));
    return out;
}

// ---- statistics ----------------------------------------------------------------------------

DatasetStats stats(const train::Dataset& data) {
    DatasetStats s;
    s.designs = data.size();
    for (const auto& ex : data) {
        auto walk = [&](auto&& self, const UINode& n) -> void {
            ++s.kind_counts[static_cast<std::size_t>(n.kind)];
            for (const auto& c : n.children) self(self, c);
        };
        walk(walk, ex.tree.root);
        ++s.node_count_hist[ui::node_count(ex.tree)];
        ++s.depth_hist[ui::depth(ex.tree)];
    }
    return s;
}

namespace {

void bar_section(std::ostringstream& os, const std::string& title,
                 const std::vector<std::pair<std::string, std::size_t>>& rows) {
    constexpr int kBarWidth = 40;
    std::size_t label_w = 0, peak = 0;
    for (const auto& [l, c] : rows) {
        label_w = std::max(label_w, l.size());
        peak = std::max(peak, c);
    }
    const std::size_t count_w = std::to_string(peak).size();
    os << title << '\n';
    for (const auto& [l, c] : rows) {
        const auto bar = peak == 0 ? 0 : static_cast<std::size_t>((c * kBarWidth + peak - 1) / peak);
        std::string count = std::to_string(c);
        os << "  " << l << std::string(label_w - l.size(), ' ') << "  " << std::string(count_w - count.size(), ' ')
           << count << "  " << std::string(bar, '#') << '\n';
    }
}

}  // namespace

std::string stats_text(const DatasetStats& s) {
    std::ostringstream os;
    os << "designs: " << s.designs << '\n';
    std::vector<std::pair<std::string, std::size_t>> rows;
    for (auto k : ui::kAllKinds) rows.emplace_back(std::string(ui::kind_name(k)), s.kind_counts[static_cast<std::size_t>(k)]);
    bar_section(os, "components by kind", rows);
    rows.clear();
    for (const auto& [n, c] : s.node_count_hist) rows.emplace_back(std::to_string(n), c);
    bar_section(os, "nodes per design", rows);
    rows.clear();
    for (const auto& [d, c] : s.depth_hist) rows.emplace_back(std::to_string(d), c);
    bar_section(os, "depth", rows);
    return os.str();
}

nlohmann::json stats_json(const DatasetStats& s) {
    nlohmann::json kinds = nlohmann::json::object(), nodes = nlohmann::json::object(), depths = nlohmann::json::object();
    for (auto k : ui::kAllKinds) kinds[std::string(ui::kind_name(k))] = s.kind_counts[static_cast<std::size_t>(k)];
    for (const auto& [n, c] : s.node_count_hist) nodes[std::to_string(n)] = c;
    for (const auto& [d, c] : s.depth_hist) depths[std::to_string(d)] = c;
    return {{"designs", s.designs}, {"kinds", kinds}, {"node_count", nodes}, {"depth", depths}};
}

// ---- files ---------------------------------------------------------------------------------

nlohmann::json spec_to_json(const codec::DesignSpec& spec) {
    const auto c = spec.canonical();
    nlohmann::json req = nlohmann::json::array(), goals = nlohmann::json::array();
    for (const auto& [k, n] : c.required) req.push_back({{"kind", ui::kind_name(k)}, {"count", n}});
    if (c.responsive) goals.push_back("responsive");
    if (c.accessible) goals.push_back("accessible");
    return {{"device", ui::device_name(c.device)}, {"required", req}, {"goals", goals}};
}

codec::DesignSpec spec_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("spec must be a JSON object");
    codec::DesignSpec spec;
    try {
        if (j.contains("device")) {
            const auto name = j.at("device").get<std::string>();
            const auto d = ui::device_from_name(name);
            if (!d) throw ParseError("unknown device '" + name + "'");
            spec.device = *d;
        }
        for (const auto& r : j.value("required", nlohmann::json::array())) {
            const auto name = r.at("kind").get<std::string>();
            const auto k = ui::kind_from_name(name);
            if (!k) throw ParseError("unknown component kind '" + name + "'");
            spec.required.emplace_back(*k, r.at("count").get<int>());
        }
        for (const auto& g : j.value("goals", nlohmann::json::array())) {
            const auto name = g.get<std::string>();
            if (name == "responsive")
                spec.responsive = true;
            else if (name == "accessible")
                spec.accessible = true;
            else
                throw ParseError("unknown goal '" + name + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed spec: ") + e.what());
    }
    codec::check_spec(spec);
    return spec.canonical();
}

namespace {

std::string item_id(std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%06zu", i);
    return buf;
}

std::string_view part_name(train::Part p) {
    switch (p) {
        case train::Part::train: return "train";
        case train::Part::val: return "val";
        default: return "test";
    }
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ParseError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + p.string());
    out << text;
}

}  // namespace

void write_corpus(const std::filesystem::path& dir, const train::Dataset& data, const train::SplitConfig& split) {
    std::filesystem::create_directories(dir / "designs");
    const auto parts = split_assignment(data.size(), split);
    nlohmann::json items = nlohmann::json::array();
    for (std::size_t i = 0; i < data.size(); ++i) {
        const std::string id = item_id(i);
        auto doc = nlohmann::json::parse(ui::to_json(data[i].tree));
        doc["spec"] = spec_to_json(data[i].spec);
        write_file(dir / "designs" / (id + ".json"), doc.dump(1) + "\n");
        items.push_back({{"id", id}, {"split", part_name(parts[i])}});
    }
    nlohmann::json index = {{"format", "uigen-corpus"}, {"version", 1}, {"seed", split.seed}, {"items", items}};
    write_file(dir / "index.json", index.dump(1) + "\n");
}

Corpus read_corpus(const std::filesystem::path& dir) {
    const auto index_path = dir / "index.json";
    nlohmann::json index;
    try {
        index = nlohmann::json::parse(read_file(index_path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(index_path.string() + ": " + e.what());
    }
    if (index.value("format", "") != "uigen-corpus") throw ParseError(index_path.string() + ": not a corpus index");
    Corpus c;
    for (const auto& item : index.at("items")) {
        const auto id = item.at("id").get<std::string>();
        const auto split = item.at("split").get<std::string>();
        const auto path = dir / "designs" / (id + ".json");
        const std::string text = read_file(path);
        train::Example ex;
        try {
            ex.tree = ui::load_json(text);
            const auto doc = nlohmann::json::parse(text);
            ex.spec = doc.contains("spec") ? spec_from_json(doc.at("spec")) : spec_of(ex.tree, false, false);
        } catch (const ParseError& e) {
            throw ParseError(path.string() + ": " + e.what());
        }
        train::Part p;
        if (split == "train")
            p = train::Part::train;
        else if (split == "val")
            p = train::Part::val;
        else if (split == "test")
            p = train::Part::test;
        else
            throw ParseError(index_path.string() + ": unknown split '" + split + "'");
        c.items.push_back(std::move(ex));
        c.parts.push_back(p);
    }
    return c;
}

train::Dataset Corpus::part(train::Part p) const {
    train::Dataset out;
    for (std::size_t i = 0; i < items.size(); ++i)
        if (parts[i] == p) out.push_back(items[i]);
    return out;
}

}  // namespace uigen::corpus
