#include "uigen/cli/app.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "uigen/cli/render.hpp"
#include "uigen/codec/vocab.hpp"
#include "uigen/core/error.hpp"
#include "uigen/corpus/corpus.hpp"
#include "uigen/reward/reward.hpp"
#include "uigen/rl/reinforce.hpp"
#include "uigen/train/trainer.hpp"
#include "uigen/ui/markup.hpp"

namespace uigen::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public Error {
public:
    using Error::Error;
};

constexpr double kTrainLr = train::TrainConfig{}.learning_rate;
constexpr double kRlLr = rl::RLConfig{}.learning_rate;

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {"n",     "seed",  "out",      "data",        "model", "epochs",
                                                  "batch", "lr",    "alpha",    "beta",        "steps", "episodes",
                                                  "temperature", "mode", "device", "require", "goal", "pe-base"};
    return keys;
}

void apply_overrides(CliConfig& cfg, const json& o, const std::string& source) {
    if (!o.is_object()) throw ConfigError(source + ": configuration must be a JSON object");
    for (const auto& [key, v] : o.items()) {
        const auto& keys = config_keys();
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            std::string valid;
            for (const auto& k : keys) valid += (valid.empty() ? "" : ", ") + k;
            throw ConfigError(source + ": unknown key '" + key + "' (valid keys: " + valid + ")");
        }
        try {
            if (key == "n") cfg.n = v.get<std::size_t>();
            else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
            else if (key == "out") cfg.out = v.get<std::string>();
            else if (key == "data") cfg.data = v.get<std::string>();
            else if (key == "model") cfg.model = v.get<std::string>();
            else if (key == "epochs") cfg.epochs = v.get<int>();
            else if (key == "batch") cfg.batch = v.get<int>();
            else if (key == "lr") cfg.lr = v.get<double>();
            else if (key == "alpha") cfg.alpha = v.get<double>();
            else if (key == "beta") cfg.beta = v.get<double>();
            else if (key == "steps") cfg.steps = v.get<int>();
            else if (key == "episodes") cfg.episodes = v.get<int>();
            else if (key == "temperature") cfg.temperature = v.get<double>();
            else if (key == "mode") cfg.mode = v.get<std::string>();
            else if (key == "device") cfg.device = v.get<std::string>();
            else if (key == "require") cfg.require = v.get<std::vector<std::string>>();
            else if (key == "goal") cfg.goal = v.get<std::vector<std::string>>();
            else if (key == "pe-base") cfg.pe_base = v.get<double>();
        } catch (const json::exception&) {
            throw ConfigError(source + ": key '" + key + "' has the wrong type");
        }
    }
}

json to_json(const CliConfig& c) {
    json j = {{"n", c.n},         {"seed", c.seed},         {"out", c.out},       {"data", c.data},
              {"model", c.model}, {"epochs", c.epochs},     {"batch", c.batch},   {"alpha", c.alpha},
              {"beta", c.beta},   {"steps", c.steps},       {"episodes", c.episodes},
              {"temperature", c.temperature}, {"mode", c.mode}, {"device", c.device},
              {"require", c.require}, {"goal", c.goal}, {"pe-base", c.pe_base}};
    if (c.lr) j["lr"] = *c.lr;
    return j;
}

namespace {

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ParseError(p.string() + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigError(p.string() + ": cannot write file");
    out << text;
}

void require_flag(const std::string& value, const char* flag, const std::string& sub) {
    if (value.empty()) throw UsageError(sub + ": missing required flag --" + flag);
}

// "ckpt/best" may name the file itself, the file without its .json suffix, or a directory
// holding best.json.
fs::path resolve_model(const std::string& arg) {
    const fs::path p(arg);
    if (fs::is_regular_file(p)) return p;
    if (fs::is_directory(p) && fs::is_regular_file(p / "best.json")) return p / "best.json";
    fs::path with = p;
    with += ".json";
    if (fs::is_regular_file(with)) return with;
    throw ParseError(arg + ": no model checkpoint found");
}

model::Model load_model_file(const std::string& arg) {
    const fs::path p = resolve_model(arg);
    try {
        return model::load_model(read_text(p));
    } catch (const ParseError& e) {
        throw ParseError(p.string() + ": " + e.what());
    }
}

corpus::Corpus load_corpus(const std::string& dir) {
    try {
        return corpus::read_corpus(dir);
    } catch (const ParseError& e) {
        const std::string what = e.what();
        throw ParseError(what.rfind(dir, 0) == 0 ? what : dir + ": " + what);
    }
}

reward::RewardConfig reward_config(const CliConfig& c) {
    reward::RewardConfig r;
    r.alpha = c.alpha;
    r.beta = c.beta;
    return r.normalized();
}

model::DecodeConfig decode_config(const CliConfig& c) {
    model::DecodeConfig d;
    if (c.mode == "greedy")
        d.mode = model::DecodeConfig::Mode::greedy;
    else if (c.mode == "sample")
        d.mode = model::DecodeConfig::Mode::sample;
    else
        throw UsageError("--mode must be greedy or sample, got '" + c.mode + "'");
    if (!(c.temperature > 0.0)) throw UsageError("--temperature must be positive");
    d.temperature = c.temperature;
    d.seed = c.seed;
    return d;
}

codec::DesignSpec spec_from_flags(const CliConfig& c) {
    codec::DesignSpec spec;
    const auto dev = ui::device_from_name(c.device);
    if (!dev) throw UsageError("--device: unknown device '" + c.device + "'");
    spec.device = *dev;
    for (const auto& r : c.require) {
        const auto colon = r.find(':');
        const auto kind = ui::kind_from_name(r.substr(0, colon));
        if (colon == std::string::npos || !kind) throw UsageError("--require: expected kind:count, got '" + r + "'");
        int count = 0;
        try {
            std::size_t used = 0;
            count = std::stoi(r.substr(colon + 1), &used);
            if (used != r.size() - colon - 1) throw std::invalid_argument(r);
        } catch (const std::exception&) {
            throw UsageError("--require: bad count in '" + r + "'");
        }
        if (count < 1 || count > 8) throw UsageError("--require: count must be in 1..8 in '" + r + "'");
        spec.required.emplace_back(*kind, count);
    }
    for (const auto& g : c.goal) {
        if (g == "responsive")
            spec.responsive = true;
        else if (g == "accessible")
            spec.accessible = true;
        else
            throw UsageError("--goal: unknown goal '" + g + "'");
    }
    return spec.canonical();
}

ui::UITree load_design_file(const std::string& path) {
    const std::string text = read_text(path);
    try {
        if (fs::path(path).extension() == ".uit") return ui::parse_markup(text);
        return ui::load_json(text);
    } catch (const Error& e) {
        throw ParseError(path + ": " + e.what());
    }
}

// ---- subcommands ---------------------------------------------------------------------------

void cmd_gen_corpus(const CliConfig& c, std::ostream&, std::ostream& err) {
    require_flag(c.out, "out", "gen-corpus");
    corpus::CorpusConfig cc;
    cc.n = c.n;
    cc.seed = c.seed;
    const auto data = corpus::generate_synthetic(cc);
    train::SplitConfig sc;
    sc.seed = c.seed;
    if (!data.empty()) corpus::write_corpus(c.out, data, sc);
    else fs::create_directories(c.out);
    const auto st = corpus::stats(data);
    write_text(fs::path(c.out) / "stats.json", corpus::stats_json(st).dump(1) + "\n");
    err << corpus::stats_text(st);
}

void cmd_train(const CliConfig& c, std::ostream&, std::ostream& err) {
    require_flag(c.data, "data", "train");
    require_flag(c.out, "out", "train");
    const auto cor = load_corpus(c.data);
    model::ModelConfig mc;
    mc.pe_base = c.pe_base;
    mc.check();
    train::TrainConfig tc;
    tc.epochs = c.epochs;
    tc.batch_size = c.batch;
    tc.learning_rate = c.lr.value_or(kTrainLr);
    tc.seed = c.seed;
    tc.check();
    const auto res = train::train(cor.part(train::Part::train), cor.part(train::Part::val),
                                  model::init_model(mc, c.seed), tc, [&](const train::EpochRecord& r) {
                                      err << "epoch " << r.epoch << "  train " << r.train_loss << "  val "
                                          << r.val_loss << '\n';
                                  });
    const fs::path out(c.out);
    write_text(out / "best.json", model::save_model(res.best));
    write_text(out / "curve.json", train::curve_json(res.curve).dump(1) + "\n");
    err << "best epoch " << res.best_epoch << ", written to " << (out / "best.json").string() << '\n';
}

void cmd_finetune(const CliConfig& c, std::ostream&, std::ostream& err) {
    require_flag(c.data, "data", "finetune-rl");
    require_flag(c.model, "model", "finetune-rl");
    require_flag(c.out, "out", "finetune-rl");
    const auto cor = load_corpus(c.data);
    const auto m = load_model_file(c.model);
    std::vector<codec::DesignSpec> specs;
    for (const auto& ex : cor.part(train::Part::train)) specs.push_back(ex.spec);
    rl::RLConfig rc;
    rc.steps = c.steps;
    rc.episodes_per_step = c.episodes;
    rc.learning_rate = c.lr.value_or(kRlLr);
    rc.temperature = c.temperature;
    rc.seed = c.seed;
    rc.check();
    const auto res = rl::finetune(m, specs, reward_config(c), rc, [&](int step, double mean, double baseline) {
        err << "step " << step << "  reward " << mean << "  baseline " << baseline << '\n';
    });
    const fs::path out(c.out);
    write_text(out / "best.json", model::save_model(res.model));
    write_text(out / "reward_curve.json", rl::curve_json(res.reward_curve).dump(1) + "\n");
}

void cmd_eval(const CliConfig& c, std::ostream& out, std::ostream&) {
    require_flag(c.data, "data", "eval");
    require_flag(c.model, "model", "eval");
    const auto cor = load_corpus(c.data);
    const auto m = load_model_file(c.model);
    auto test = cor.part(train::Part::test);
    if (test.empty()) throw EmptyDatasetError(c.data + ": corpus has no test items");
    const auto report = train::evaluate(m, test, reward_config(c), decode_config(c));
    const std::string text = train::to_json(report).dump(2) + "\n";
    out << text;
    if (!c.out.empty()) write_text(c.out, text);
}

void cmd_generate(const CliConfig& c, std::ostream& out, std::ostream&) {
    require_flag(c.model, "model", "generate");
    const auto spec = spec_from_flags(c);
    const auto dc = decode_config(c);
    const auto m = load_model_file(c.model);
    const auto gen = model::generate(spec, m, dc);
    const std::string text = ui::print_markup(gen.tree);
    if (c.out.empty())
        out << text;
    else
        write_text(c.out, text);
}

void cmd_score(const CliConfig& c, std::ostream& out, std::ostream&) {
    require_flag(c.input, "input", "score");
    const auto tree = load_design_file(c.input);
    out << reward::to_json(reward::reward(tree, reward_config(c))).dump(2) << '\n';
}

void cmd_render(const CliConfig& c, std::ostream& out, std::ostream&) {
    require_flag(c.input, "input", "render");
    const auto html = render_html(load_design_file(c.input));
    if (c.out.empty())
        out << html;
    else
        write_text(c.out, html);
}

void cmd_vocab(const CliConfig& c, std::ostream& out, std::ostream&) {
    const std::string text = codec::Vocab::standard().dump();
    if (c.out.empty())
        out << text;
    else
        write_text(c.out, text);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Specification-conditioned UI layout generation", "uigen"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    CliConfig flags;
    std::string config_path;
    double lr = 0.0;
    std::map<std::string, CLI::Option*> opts;
    opts["n"] = app.add_option("--n", flags.n, "Number of designs to generate");
    opts["seed"] = app.add_option("--seed", flags.seed, "Random seed (falls back to UIGEN_SEED)");
    opts["out"] = app.add_option("--out", flags.out, "Output file or directory");
    opts["data"] = app.add_option("--data", flags.data, "Corpus directory");
    opts["model"] = app.add_option("--model", flags.model, "Model checkpoint");
    opts["epochs"] = app.add_option("--epochs", flags.epochs, "Training epochs");
    opts["batch"] = app.add_option("--batch", flags.batch, "Batch size");
    opts["lr"] = app.add_option("--lr", lr, "Learning rate");
    opts["alpha"] = app.add_option("--alpha", flags.alpha, "Usability weight of the reward");
    opts["beta"] = app.add_option("--beta", flags.beta, "Aesthetics weight of the reward");
    opts["steps"] = app.add_option("--steps", flags.steps, "REINFORCE steps");
    opts["episodes"] = app.add_option("--episodes", flags.episodes, "Episodes per REINFORCE step");
    opts["temperature"] = app.add_option("--temperature", flags.temperature, "Sampling temperature");
    opts["mode"] = app.add_option("--mode", flags.mode, "Decoding mode: greedy or sample");
    opts["device"] = app.add_option("--device", flags.device, "Target device: phone, tablet or desktop");
    opts["require"] = app.add_option("--require", flags.require, "Required component as kind:count (repeatable)");
    opts["goal"] = app.add_option("--goal", flags.goal, "Design goal: responsive or accessible (repeatable)");
    opts["pe-base"] = app.add_option("--pe-base", flags.pe_base, "Base of the positional encoding");
    app.add_option("--config", config_path, "JSON file with settings; flags override it");

    struct Sub {
        const char* name;
        const char* help;
        bool positional;
    };
    const Sub subs[] = {
        {"gen-corpus", "Generate a synthetic corpus directory", false},
        {"train", "Train a model on a corpus", false},
        {"finetune-rl", "Fine-tune a model with REINFORCE against the reward", false},
        {"eval", "Evaluate a model on the corpus test split", false},
        {"generate", "Generate a design for a spec given by flags", false},
        {"score", "Print the reward breakdown of a .uit or JSON design", true},
        {"render", "Render a .uit or JSON design as an HTML wireframe", true},
        {"vocab-dump", "Print the token vocabulary, one surface form per line", false},
    };
    for (const auto& s : subs) {
        auto* sc = app.add_subcommand(s.name, s.help);
        sc->fallthrough();
        if (s.positional) sc->add_option("input", flags.input, "Design file")->required();
    }

    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();  // program name
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "uigen: " << e.what() << '\n';
        return 1;
    }

    try {
        CliConfig cfg;
        cfg.subcommand = app.get_subcommands().front()->get_name();
        if (const char* env = std::getenv("UIGEN_SEED"); env != nullptr && *env != '\0') {
            try {
                std::size_t used = 0;
                cfg.seed = std::stoull(env, &used);
                if (env[used] != '\0') throw std::invalid_argument(env);
            } catch (const std::exception&) {
                throw UsageError(std::string("UIGEN_SEED: not an unsigned integer: '") + env + "'");
            }
        }
        if (!config_path.empty()) {
            json j;
            try {
                j = json::parse(read_text(config_path));
            } catch (const json::parse_error& e) {
                throw UsageError(config_path + ": malformed JSON config: " + e.what());
            }
            apply_overrides(cfg, j, config_path);
        }
        json explicit_flags = json::object();
        const json all = to_json(flags);
        for (const auto& [key, opt] : opts) {
            if (opt->count() == 0) continue;
            explicit_flags[key] = key == "lr" ? json(lr) : all.at(key);
        }
        apply_overrides(cfg, explicit_flags, "command line");
        cfg.input = flags.input;

        const std::string& sub = cfg.subcommand;
        if (sub == "gen-corpus") cmd_gen_corpus(cfg, out, err);
        else if (sub == "train") cmd_train(cfg, out, err);
        else if (sub == "finetune-rl") cmd_finetune(cfg, out, err);
        else if (sub == "eval") cmd_eval(cfg, out, err);
        else if (sub == "generate") cmd_generate(cfg, out, err);
        else if (sub == "score") cmd_score(cfg, out, err);
        else if (sub == "render") cmd_render(cfg, out, err);
        else if (sub == "vocab-dump") cmd_vocab(cfg, out, err);
        return 0;
    } catch (const UsageError& e) {
        err << "uigen: " << e.what() << '\n';
        return 1;
    } catch (const ConfigError& e) {
        err << "uigen: " << e.what() << '\n';
        return 1;
    } catch (const Error& e) {
        err << "uigen: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "uigen: " << e.what() << '\n';
        return 2;
    }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace uigen::cli
