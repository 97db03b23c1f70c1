#include "uigen/ui/markup.hpp"

#include <charconv>
#include "json.hpp"

#include "uigen/core/error.hpp"

namespace uigen::ui {

namespace {

struct Tok {
    enum Type { lparen, rparen, word, attr, end } type = end;
    std::string_view key{};   // word text, or attribute key
    std::string_view value{}; // attribute value
    std::size_t line = 1;
    std::size_t col = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view s) : s_(s) {}

    Tok next() {
        skip_ws();
        Tok t{Tok::end, {}, {}, line_, col_};
        if (pos_ >= s_.size()) return t;
        const char c = s_[pos_];
        if (c == '(') {
            advance();
            t.type = Tok::lparen;
            return t;
        }
        if (c == ')') {
            advance();
            t.type = Tok::rparen;
            return t;
        }
        if (!is_ident(c)) {
            throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
        }
        const std::size_t start = pos_;
        while (pos_ < s_.size() && is_ident(s_[pos_])) advance();
        t.key = s_.substr(start, pos_ - start);
        // key=value, whitespace allowed around '='
        const std::size_t save_pos = pos_, save_line = line_, save_col = col_;
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == '=') {
            advance();
            skip_ws();
            const std::size_t vstart = pos_;
            while (pos_ < s_.size() && is_ident(s_[pos_])) advance();
            if (pos_ == vstart) throw ParseError("expected value after '='", line_, col_);
            t.type = Tok::attr;
            t.value = s_.substr(vstart, pos_ - vstart);
            return t;
        }
        pos_ = save_pos;
        line_ = save_line;
        col_ = save_col;
        t.type = Tok::word;
        return t;
    }

private:
    static bool is_ident(char c) noexcept {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
               c == '-';
    }
    void advance() {
        if (s_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }
    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r'))
            advance();
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

class MarkupParser {
public:
    explicit MarkupParser(std::string_view s) : lex_(s) { shift(); }

    UITree parse_tree() {
        UITree tree;
        expect_lparen();
        const Tok kind_tok = cur_;
        tree.root.kind = parse_kind();
        if (tree.root.kind != ComponentKind::container) {
            throw ParseError("root must be a container", kind_tok.line, kind_tok.col);
        }
        if (cur_.type == Tok::end) eof("expected attribute or ')'");
        if (cur_.type != Tok::attr || cur_.key != "device") fail("expected 'device='");
        const auto dev = device_from_name(cur_.value);
        if (!dev) fail("unknown device '" + std::string(cur_.value) + "'");
        tree.device = *dev;
        shift();
        parse_body(tree.root, 1);
        if (tree.root.x != 0 || tree.root.y != 0 || tree.root.w != kGrid || tree.root.h != kGrid) {
            throw RangeError("root container must be at x=0 y=0 with w=64 h=64");
        }
        if (cur_.type != Tok::end) fail("unexpected input after the root node");
        if (count_ > kMaxNodes) throw RangeError("tree has " + std::to_string(count_) + " nodes, limit is 48");
        return tree;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, cur_.line, cur_.col); }
    // Unexpected end of input is reported at the last token read.
    [[noreturn]] void eof(const std::string& msg) const { throw ParseError(msg, last_.line, last_.col); }

    void shift() {
        last_ = cur_;
        cur_ = lex_.next();
    }

    void expect_lparen() {
        if (cur_.type == Tok::end) eof("expected '('");
        if (cur_.type != Tok::lparen) fail("expected '('");
        shift();
    }

    ComponentKind parse_kind() {
        if (cur_.type == Tok::end) eof("expected component kind");
        if (cur_.type != Tok::word) fail("expected component kind");
        const auto k = kind_from_name(cur_.key);
        if (!k) fail("unknown component kind '" + std::string(cur_.key) + "'");
        shift();
        return *k;
    }

    int int_attr(std::string_view key, int lo, int hi) {
        if (cur_.type == Tok::end) eof("expected attribute or ')'");
        if (cur_.type != Tok::attr || cur_.key != key) fail("expected '" + std::string(key) + "='");
        int v = 0;
        const auto* b = cur_.value.data();
        const auto* e = b + cur_.value.size();
        auto [p, ec] = std::from_chars(b, e, v);
        if (ec != std::errc{} || p != e) fail("expected integer value for '" + std::string(key) + "'");
        if (v < lo || v > hi) {
            throw RangeError("line " + std::to_string(cur_.line) + ", col " + std::to_string(cur_.col) + ": " +
                             std::string(key) + "=" + std::to_string(v) + " outside [" + std::to_string(lo) +
                             ", " + std::to_string(hi) + "]");
        }
        shift();
        return v;
    }

    void parse_body(UINode& n, int depth) {
        ++count_;
        if (depth > kMaxDepth) throw RangeError("tree depth exceeds 6");
        const Tok at = cur_;
        n.x = int_attr("x", 0, kGrid - 1);
        n.y = int_attr("y", 0, kGrid - 1);
        n.w = int_attr("w", 1, kGrid);
        n.h = int_attr("h", 1, kGrid);
        if (n.x + n.w > kGrid || n.y + n.h > kGrid) {
            throw RangeError("line " + std::to_string(at.line) + ", col " + std::to_string(at.col) +
                             ": node extends past the 64x64 canvas");
        }
        if (cur_.type == Tok::attr && cur_.key == "color") n.color = int_attr("color", 0, kPaletteSize - 1);
        if (cur_.type == Tok::attr && cur_.key == "text") {
            if (cur_.value == "short")
                n.text = TextClass::short_text;
            else if (cur_.value == "long")
                n.text = TextClass::long_text;
            else
                fail("text must be 'short' or 'long'");
            shift();
        }
        for (;;) {
            if (cur_.type == Tok::end) eof(n.children.empty() ? "expected attribute or ')'" : "expected '(' or ')'");
            if (cur_.type == Tok::rparen) {
                shift();
                return;
            }
            if (cur_.type == Tok::attr) fail("unexpected attribute '" + std::string(cur_.key) + "'");
            if (cur_.type != Tok::lparen) fail("expected '(' or ')'");
            if (!is_container(n.kind)) {
                fail("leaf kind '" + std::string(kind_name(n.kind)) + "' cannot have children");
            }
            shift();
            UINode child;
            const Tok kind_tok = cur_;
            child.kind = parse_kind();
            if (cur_.type == Tok::attr && cur_.key == "device") {
                throw ParseError("'device=' is only allowed on the root", kind_tok.line, kind_tok.col);
            }
            parse_body(child, depth + 1);
            n.children.push_back(std::move(child));
        }
    }

    Lexer lex_;
    Tok cur_{Tok::end};
    Tok last_{Tok::end};
    int count_ = 0;
};

void print_node(const UINode& n, int depth, const UITree* root_of, std::string& out) {
    out.append(static_cast<std::size_t>(2 * depth), ' ');
    out += '(';
    out += kind_name(n.kind);
    if (root_of) {
        out += " device=";
        out += device_name(root_of->device);
    }
    out += " x=" + std::to_string(n.x) + " y=" + std::to_string(n.y) + " w=" + std::to_string(n.w) +
           " h=" + std::to_string(n.h);
    if (n.color != 0) out += " color=" + std::to_string(n.color);
    if (n.text != TextClass::none) {
        out += " text=";
        out += text_class_name(n.text);
    }
    if (n.children.empty()) {
        out += ")\n";
        return;
    }
    out += '\n';
    for (const auto& c : n.children) print_node(c, depth + 1, nullptr, out);
    out.append(static_cast<std::size_t>(2 * depth), ' ');
    out += ")\n";
}

// ---- JSON ---------------------------------------------------------------------------------

using nlohmann::json;

int json_int(const json& obj, const char* field) {
    if (!obj.contains(field)) throw ParseError(std::string("missing field ") + field);
    const json& v = obj.at(field);
    if (!v.is_number()) throw ParseError(std::string("field ") + field + " must be a number");
    const double d = v.get<double>();
    if (d < 0) throw RangeError(std::string("negative geometry in field ") + field);
    return static_cast<int>(d);
}

int to_grid(long px, int canvas) { return static_cast<int>(px * kGrid / canvas); }

void load_node(const json& obj, UINode& n, Canvas canvas, int depth, int& count) {
    if (!obj.is_object()) throw ParseError("component must be a JSON object");
    if (++count > kMaxNodes) throw RangeError("design has more than 48 components");
    if (depth > kMaxDepth) throw RangeError("design nesting exceeds depth 6");
    if (!obj.contains("type")) throw ParseError("missing field type");
    if (!obj.at("type").is_string()) throw ParseError("field type must be a string");
    const auto type = obj.at("type").get<std::string>();
    const auto kind = kind_from_name(type);
    if (!kind) throw ParseError("unknown component type '" + type + "'");
    n.kind = *kind;
    const int px = json_int(obj, "x"), py = json_int(obj, "y"), pw = json_int(obj, "w"), ph = json_int(obj, "h");
    n.x = to_grid(px, canvas.w);
    n.y = to_grid(py, canvas.h);
    n.w = std::max(1, to_grid(pw, canvas.w));
    n.h = std::max(1, to_grid(ph, canvas.h));
    if (n.x > kGrid - 1 || n.y > kGrid - 1 || n.w > kGrid || n.h > kGrid || n.x + n.w > kGrid ||
        n.y + n.h > kGrid) {
        throw RangeError("component '" + type + "' lies outside the canvas");
    }
    if (obj.contains("color") && !obj.at("color").is_null()) {
        const json& c = obj.at("color");
        if (!c.is_string()) throw ParseError("field color must be a \"#RRGGBB\" string");
        const auto rgb = parse_hex_color(c.get<std::string>());
        if (!rgb) throw ParseError("bad color '" + c.get<std::string>() + "'");
        n.color = nearest_palette_index(*rgb);
    }
    if (obj.contains("text") && !obj.at("text").is_null()) {
        const json& t = obj.at("text");
        if (!t.is_string()) throw ParseError("field text must be a string");
        const auto s = t.get<std::string>();
        if (s == "none" || s.empty())
            n.text = TextClass::none;
        else if (s == "short")
            n.text = TextClass::short_text;
        else if (s == "long")
            n.text = TextClass::long_text;
        else
            n.text = s.size() <= 20 ? TextClass::short_text : TextClass::long_text;
    }
    if (obj.contains("children")) {
        const json& ch = obj.at("children");
        if (!ch.is_array()) throw ParseError("field children must be an array");
        if (!ch.empty() && !is_container(n.kind)) {
            throw ParseError("leaf component '" + type + "' cannot have children");
        }
        for (const auto& c : ch) {
            UINode child;
            load_node(c, child, canvas, depth + 1, count);
            n.children.push_back(std::move(child));
        }
    }
}

UITree load_design(const json& doc) {
    if (!doc.is_object()) throw ParseError("design must be a JSON object");
    UITree tree;
    Canvas canvas{kGrid, kGrid};
    if (doc.contains("canvas")) {
        const json& c = doc.at("canvas");
        if (!c.is_object()) throw ParseError("field canvas must be an object");
        canvas.w = json_int(c, "w");
        canvas.h = json_int(c, "h");
        if (canvas.w <= 0 || canvas.h <= 0) throw RangeError("canvas must have positive size");
    }
    if (!doc.contains("root")) throw ParseError("missing field root");
    int count = 0;
    load_node(doc.at("root"), tree.root, canvas, 1, count);
    if (doc.contains("device")) {
        if (!doc.at("device").is_string()) throw ParseError("field device must be a string");
        const auto name = doc.at("device").get<std::string>();
        const auto d = device_from_name(name);
        if (!d) throw ParseError("unknown device '" + name + "'");
        tree.device = *d;
    }
    if (tree.root.kind != ComponentKind::container) throw RangeError("root component must be a container");
    if (tree.root.x != 0 || tree.root.y != 0 || tree.root.w != kGrid || tree.root.h != kGrid) {
        throw RangeError("root component must cover the whole canvas");
    }
    return tree;
}

json parse_json(std::string_view doc) {
    try {
        return json::parse(doc);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        const std::size_t upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, doc.size());
        for (std::size_t i = 0; i < upto; ++i) {
            if (doc[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError("malformed JSON", line, col);
    }
}

json node_json(const UINode& n, Canvas canvas) {
    const int sx = canvas.w / kGrid, sy = canvas.h / kGrid;
    json j;
    j["type"] = kind_name(n.kind);
    j["x"] = n.x * sx;
    j["y"] = n.y * sy;
    j["w"] = n.w * sx;
    j["h"] = n.h * sy;
    j["color"] = palette_hex(n.color);
    if (n.text != TextClass::none) j["text"] = text_class_name(n.text);
    json ch = json::array();
    for (const auto& c : n.children) ch.push_back(node_json(c, canvas));
    j["children"] = std::move(ch);
    return j;
}

}  // namespace

UITree parse_markup(std::string_view text) { return MarkupParser(text).parse_tree(); }

std::string print_markup(const UITree& tree) {
    std::string out;
    print_node(tree.root, 0, &tree, out);
    return out;
}

UITree load_json(std::string_view doc) { return load_design(parse_json(doc)); }

std::vector<UITree> load_json_designs(std::string_view doc) {
    const json j = parse_json(doc);
    std::vector<UITree> out;
    if (j.is_array()) {
        for (const auto& d : j) out.push_back(load_design(d));
    } else {
        out.push_back(load_design(j));
    }
    return out;
}

Canvas default_canvas(Device d) noexcept {
    switch (d) {
        case Device::tablet: return {768, 1024};
        case Device::desktop: return {1280, 768};
        default: return {320, 640};
    }
}

std::string to_json(const UITree& tree, int indent) {
    const Canvas c = default_canvas(tree.device);
    json j;
    j["device"] = device_name(tree.device);
    j["canvas"] = {{"w", c.w}, {"h", c.h}};
    j["root"] = node_json(tree.root, c);
    return j.dump(indent);
}

}  // namespace uigen::ui
