#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mailocr/countermeasure.hpp"
#include "mailocr/dataset.hpp"
#include "mailocr/errors.hpp"
#include "mailocr/harness.hpp"
#include "mailocr/lexicon.hpp"
#include "mailocr/model.hpp"
#include "mailocr/train.hpp"

namespace {

using namespace mailocr;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StorageError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TrainCliConfig {
    ModelConfig model;
    TrainConfig train;
    std::uint64_t init_seed = 1;
};

TrainCliConfig parse_train_config(const std::string& path, TrainConfig defaults) {
    TrainCliConfig out;
    out.train = defaults;
    if (path.empty()) return out;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(slurp(path));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad train config JSON: ") + e.what());
    }
    if (j.contains("model")) out.model = model_config_from_json_text(j.at("model").dump());
    out.init_seed = j.value("init_seed", out.init_seed);
    if (j.contains("train")) {
        const auto& t = j.at("train");
        out.train.learning_rate = t.value("learning_rate", out.train.learning_rate);
        out.train.batch_size = t.value("batch_size", out.train.batch_size);
        out.train.iterations = t.value("iterations", out.train.iterations);
        out.train.seed = t.value("seed", out.train.seed);
        out.train.eval_every = t.value("eval_every", out.train.eval_every);
        if (t.contains("freeze")) {
            const auto s = t.at("freeze").get<std::string>();
            if (s == "encoder-frozen") {
                out.train.freeze = FreezePolicy::EncoderFrozen;
            } else if (s == "none") {
                out.train.freeze = FreezePolicy::None;
            } else {
                throw ConfigError("unknown freeze policy: " + s);
            }
        }
        if (t.contains("adam")) {
            out.train.adam.beta1 = t.at("adam").value("beta1", out.train.adam.beta1);
            out.train.adam.beta2 = t.at("adam").value("beta2", out.train.adam.beta2);
            out.train.adam.eps = t.at("adam").value("eps", out.train.adam.eps);
        }
    }
    return out;
}

void report_training(const TrainResult& result, const std::string& out_path) {
    save_checkpoint(result.params, out_path);
    result.log.write_csv(out_path + ".log.csv");
    if (!result.log.rows.empty()) {
        const auto& last = result.log.rows.back();
        std::cout << "final iteration " << last.iteration << ": loss " << last.loss
                  << ", holdout char accuracy " << last.char_acc << "\n";
    }
    std::cout << "checkpoint written to " << out_path << "\n";
}

int run(int argc, char** argv) {
    CLI::App app{"mail security pattern attack laboratory"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a labeled word-image dataset");
    std::string gen_config, gen_out;
    gen->add_option("--config", gen_config, "dataset config JSON file")->required();
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->callback([&] {
        const auto cfg = dataset_config_from_json_text(slurp(gen_config));
        const Manifest m = generate_dataset(cfg, gen_out);
        std::cout << m.records.size() << " samples written to " << gen_out << "\n";
    });

    // pretrain
    auto* pre = app.add_subcommand("pretrain", "train from scratch on a dataset");
    std::string pre_data, pre_config, pre_out;
    pre->add_option("--data", pre_data, "dataset directory")->required();
    pre->add_option("--config", pre_config, "train config JSON file");
    pre->add_option("--out", pre_out, "checkpoint path")->required();
    pre->callback([&] {
        const auto cfg = parse_train_config(pre_config, TrainConfig{});
        auto data = train_data_from_dir(pre_data, cfg.model);
        auto result = train_loop(data, cfg.train, init_params(cfg.model, cfg.init_seed));
        report_training(result, pre_out);
    });

    // finetune
    auto* fine = app.add_subcommand("finetune", "continue training from a checkpoint");
    std::string fine_base, fine_data, fine_config, fine_out;
    bool fine_freeze = false;
    fine->add_option("--base", fine_base, "starting checkpoint")->required();
    fine->add_option("--data", fine_data, "dataset directory")->required();
    fine->add_option("--config", fine_config, "train config JSON file");
    fine->add_option("--out", fine_out, "checkpoint path")->required();
    fine->add_flag("--freeze-encoder", fine_freeze, "update only decoder parameters");
    fine->callback([&] {
        ModelParams base = load_checkpoint(fine_base);
        auto cfg = parse_train_config(fine_config, TrainConfig{});
        if (fine_freeze) cfg.train.freeze = FreezePolicy::EncoderFrozen;
        auto data = train_data_from_dir(fine_data, base.config);
        auto result = train_loop(data, cfg.train, std::move(base));
        report_training(result, fine_out);
    });

    // gradcheck
    auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient verification");
    std::uint64_t gc_seed = 1;
    int gc_probes = 10;
    std::string gc_config;
    gc->add_option("--seed", gc_seed, "probe seed")->required();
    gc->add_option("--probes", gc_probes, "number of probed coordinates");
    gc->add_option("--config", gc_config, "model config JSON file (default: compact model)");
    gc->callback([&] {
        ModelConfig cfg;
        if (gc_config.empty()) {
            cfg.conv_channels = {4, 6, 8, 10};
            cfg.canvas_w = 40;
            cfg.canvas_h = 16;
        } else {
            cfg = model_config_from_json_text(slurp(gc_config));
        }
        const double err = gradient_check(cfg, gc_seed, gc_probes);
        std::cout << "max relative error over " << gc_probes << " probes: " << err << "\n";
        if (err >= 1e-3) throw ContractError("gradient check failed");
    });

    // correct
    auto* cor = app.add_subcommand("correct", "spell-correct predictions from a CSV");
    std::string cor_lex, cor_in;
    bool cor_domain = false;
    CorrectionConfig cor_cfg;
    cor->add_option("--lexicon", cor_lex, "lexicon file (WORD[\\tfreq] per line)")->required();
    cor->add_flag("--domain", cor_domain, "confidence-weighted domain correction");
    cor->add_option("--gate", cor_cfg.gate, "mean-confidence gate");
    cor->add_option("--max-dist", cor_cfg.max_dist, "general correction radius");
    cor->add_option("--in", cor_in, "input CSV 'WORD,c1,c2,...' (default stdin)");
    cor->callback([&] {
        const Lexicon lex = Lexicon::read_file(cor_lex);
        std::ifstream file;
        if (!cor_in.empty()) {
            file.open(cor_in);
            if (!file) throw StorageError("cannot open " + cor_in);
        }
        std::istream& in = cor_in.empty() ? std::cin : file;
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            std::vector<std::string> fields;
            std::size_t pos = 0;
            while (true) {
                const auto comma = line.find(',', pos);
                fields.push_back(
                    line.substr(pos, comma == std::string::npos ? comma : comma - pos));
                if (comma == std::string::npos) break;
                pos = comma + 1;
            }
            const std::string& word = fields[0];
            if (cor_domain) {
                std::vector<double> conf;
                for (std::size_t i = 1; i < fields.size(); ++i) {
                    conf.push_back(std::strtod(fields[i].c_str(), nullptr));
                }
                std::cout << correct_domain(word, conf, lex, cor_cfg) << "\n";
            } else {
                std::cout << correct_general(word, lex, cor_cfg) << "\n";
            }
        }
    });

    // countermeasure
    auto* cm = app.add_subcommand("countermeasure",
                                  "mirror a dataset with the content-aware shader");
    std::string cm_in, cm_out, cm_params;
    cm->add_option("--in", cm_in, "source dataset directory")->required();
    cm->add_option("--out", cm_out, "mirror directory")->required();
    cm->add_option("--params", cm_params, "shader params JSON file");
    cm->callback([&] {
        const ShaderParams p = cm_params.empty() ? ShaderParams{}
                                                 : shader_params_from_json_text(slurp(cm_params));
        const Manifest m = augment_dataset(cm_in, cm_out, p);
        std::cout << m.records.size() << " shader-augmented samples written to " << cm_out
                  << "\n";
    });

    // experiment
    auto* exp = app.add_subcommand("experiment", "run the full evaluation matrix");
    std::string exp_config, exp_out;
    exp->add_option("--config", exp_config, "experiment config JSON file")->required();
    exp->add_option("--out", exp_out, "output directory")->required();
    exp->callback([&] {
        const auto cfg = experiment_config_from_json_text(slurp(exp_config));
        const EvalReport report = run_experiment(cfg, exp_out);
        for (const auto& r : report.rows) {
            std::cout << "pattern " << r.test_pattern << " correction " << to_string(r.correction)
                      << " shader " << (r.countermeasure ? "on" : "off") << ": char "
                      << r.char_acc << ", word " << r.word_acc << " (n=" << r.n << ")\n";
        }
        std::cout << "report written to " << (std::filesystem::path(exp_out) / "report.csv")
                  << "\n";
    });

    // eval
    auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    std::string ev_ckpt, ev_data, ev_lex, ev_split = "all";
    bool ev_domain = false;
    CorrectionConfig ev_cfg;
    ev->add_option("--ckpt", ev_ckpt, "checkpoint path")->required();
    ev->add_option("--data", ev_data, "dataset directory")->required();
    ev->add_option("--lexicon", ev_lex, "enable correction against this lexicon");
    ev->add_flag("--domain", ev_domain, "use domain correction instead of general");
    ev->add_option("--gate", ev_cfg.gate, "mean-confidence gate");
    ev->add_option("--max-dist", ev_cfg.max_dist, "general correction radius");
    ev->add_option("--split", ev_split, "record filter: all, train or eval");
    ev->callback([&] {
        ModelParams params = load_checkpoint(ev_ckpt);
        EvalOptions opts;
        opts.correction_cfg = ev_cfg;
        Lexicon lex;
        if (!ev_lex.empty()) {
            lex = Lexicon::read_file(ev_lex);
            opts.lexicon = &lex;
            opts.correction = ev_domain ? Correction::Domain : Correction::General;
        }
        if (ev_split == "train") {
            opts.filter = SplitFilter::TrainOnly;
        } else if (ev_split == "eval") {
            opts.filter = SplitFilter::EvalOnly;
        } else if (ev_split != "all") {
            throw ConfigError("--split must be all, train or eval");
        }
        const EvalResult r = evaluate_dataset(params, ev_data, opts);
        std::cout << "char_acc=" << r.char_acc << "\nword_acc=" << r.word_acc
                  << "\nn=" << r.n << "\n";
    });

    CLI11_PARSE(app, argc, argv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
