#include "mailocr/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mailocr/errors.hpp"
#include "mailocr/rng.hpp"

namespace mailocr {

using nlohmann::json;

double char_accuracy(const std::string& pred, const std::string& truth) {
    if (truth.empty()) throw ContractError("char_accuracy: truth must be non-empty");
    const std::size_t longest = std::max(pred.size(), truth.size());
    return 1.0 - static_cast<double>(edit_distance(pred, truth)) /
                     static_cast<double>(longest);
}

double word_accuracy(const std::vector<std::pair<std::string, std::string>>& pairs) {
    if (pairs.empty()) throw ContractError("word_accuracy: empty list");
    std::size_t hits = 0;
    for (const auto& [pred, truth] : pairs) hits += pred == truth;
    return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

PatternSpec canonical_pattern(int id) {
    PatternSpec p;
    p.period = 8;
    p.ink = 0.5;
    switch (id) {
        case 1:
            p.kind = PatternKind::DiagonalHatch;
            p.stroke = 2;
            break;
        case 2:
            p.kind = PatternKind::Crosshatch;
            p.stroke = 2;
            break;
        case 3:
            p.kind = PatternKind::TiledGlyph;
            p.stroke = 1;
            p.seed = 7;
            break;
        default:
            throw ConfigError("pattern id must be 1, 2 or 3");
    }
    return p;
}

const char* to_string(Correction c) {
    switch (c) {
        case Correction::None: return "none";
        case Correction::General: return "general";
        case Correction::Domain: return "domain";
    }
    return "?";
}

Correction correction_from_string(const std::string& s) {
    if (s == "none") return Correction::None;
    if (s == "general") return Correction::General;
    if (s == "domain") return Correction::Domain;
    throw ConfigError("unknown correction mode: " + s);
}

// ---- evaluation ---------------------------------------------------------

EvalResult evaluate_dataset(ModelParams& params, const std::filesystem::path& dir,
                            const EvalOptions& opts) {
    auto samples = load_dataset(dir);
    std::erase_if(samples, [&](const LoadedSample& s) {
        return (opts.filter == SplitFilter::TrainOnly && s.split != Split::Train) ||
               (opts.filter == SplitFilter::EvalOnly && s.split != Split::Eval);
    });
    EvalResult result;
    if (samples.empty()) return result;
    if (opts.correction != Correction::None && opts.lexicon == nullptr) {
        throw ConfigError("correction requested without a lexicon");
    }

    const int max_len = params.config.max_len;
    double char_sum = 0;
    std::size_t word_hits = 0;
    constexpr std::size_t kChunk = 64;
    for (std::size_t i = 0; i < samples.size(); i += kChunk) {
        const std::size_t end = std::min(samples.size(), i + kChunk);
        std::vector<const GrayImage*> images;
        for (std::size_t j = i; j < end; ++j) images.push_back(&samples[j].image);
        const auto preds = predict_batch(images, params);
        for (std::size_t j = i; j < end; ++j) {
            const Prediction& raw = preds[j - i];
            const std::string& truth = samples[j].label;
            std::string corrected = raw.text;
            if (opts.correction == Correction::General) {
                corrected = correct_general(raw.text, *opts.lexicon, opts.correction_cfg);
            } else if (opts.correction == Correction::Domain) {
                corrected =
                    correct_domain(raw.text, raw.confidences, *opts.lexicon, opts.correction_cfg);
            }
            char_sum += char_accuracy(corrected, truth);
            word_hits += corrected == truth;
            for (int t = 0; t < max_len; ++t) {
                const int ti = t < static_cast<int>(truth.size())
                                   ? char_to_index(truth[static_cast<std::size_t>(t)])
                                   : kPadIndex;
                const int pi = t < static_cast<int>(raw.text.size())
                                   ? char_to_index(raw.text[static_cast<std::size_t>(t)])
                                   : kPadIndex;
                ++result.confusion[static_cast<std::size_t>(ti)][static_cast<std::size_t>(pi)];
            }
        }
    }
    result.n = static_cast<int>(samples.size());
    result.char_acc = char_sum / static_cast<double>(samples.size());
    result.word_acc = static_cast<double>(word_hits) / static_cast<double>(samples.size());
    return result;
}

// ---- experiment config --------------------------------------------------

ExperimentConfig::ExperimentConfig() {
    // desk-scale training profile: small enough for a single CPU core
    model.conv_channels = {8, 16, 24, 32};
    pretrain.iterations = 1200;
    pretrain.batch_size = 16;
    pretrain.eval_every = 200;
    finetune.iterations = 3000;
    finetune.batch_size = 16;
    finetune.eval_every = 200;
}

void ExperimentConfig::validate() const {
    if (test_patterns.empty()) throw ConfigError("test_patterns must be non-empty");
    if (corrections.empty()) throw ConfigError("corrections must be non-empty");
    if (n_pretrain < 1 || n_finetune < 1 || n_eval < 1) {
        throw ConfigError("dataset sizes must be >= 1");
    }
    canonical_pattern(train_pattern);
    for (int p : test_patterns) canonical_pattern(p);
    for (int j : jitter_sweep) {
        if (j < 0) throw ConfigError("jitter must be >= 0");
    }
    if (!(pretrain_split > 0 && pretrain_split < 1) ||
        !(finetune_split > 0 && finetune_split < 1)) {
        throw ConfigError("split fractions must be in (0,1)");
    }
    model.validate();
    pretrain.validate();
    finetune.validate();
    compose.validate();
    correction_cfg.validate();
    shader.validate();
}

namespace {

json train_config_to_json(const TrainConfig& t) {
    return json{{"learning_rate", t.learning_rate},
                {"batch_size", t.batch_size},
                {"iterations", t.iterations},
                {"seed", t.seed},
                {"freeze", t.freeze == FreezePolicy::EncoderFrozen ? "encoder-frozen" : "none"},
                {"adam", {{"beta1", t.adam.beta1}, {"beta2", t.adam.beta2}, {"eps", t.adam.eps}}},
                {"eval_every", t.eval_every}};
}

TrainConfig train_config_from_json(const json& j, TrainConfig t) {
    t.learning_rate = j.value("learning_rate", t.learning_rate);
    t.batch_size = j.value("batch_size", t.batch_size);
    t.iterations = j.value("iterations", t.iterations);
    t.seed = j.value("seed", t.seed);
    if (j.contains("freeze")) {
        const auto s = j.at("freeze").get<std::string>();
        if (s == "none") {
            t.freeze = FreezePolicy::None;
        } else if (s == "encoder-frozen") {
            t.freeze = FreezePolicy::EncoderFrozen;
        } else {
            throw ConfigError("unknown freeze policy: " + s);
        }
    }
    if (j.contains("adam")) {
        t.adam.beta1 = j.at("adam").value("beta1", t.adam.beta1);
        t.adam.beta2 = j.at("adam").value("beta2", t.adam.beta2);
        t.adam.eps = j.at("adam").value("eps", t.adam.eps);
    }
    t.eval_every = j.value("eval_every", t.eval_every);
    return t;
}

}  // namespace

std::string experiment_config_json(const ExperimentConfig& cfg) {
    json corrections = json::array();
    for (auto c : cfg.corrections) corrections.push_back(to_string(c));
    return json{{"seed", cfg.seed},
                {"n_pretrain", cfg.n_pretrain},
                {"n_finetune", cfg.n_finetune},
                {"n_eval", cfg.n_eval},
                {"train_pattern", cfg.train_pattern},
                {"test_patterns", cfg.test_patterns},
                {"corrections", corrections},
                {"countermeasure", cfg.countermeasure},
                {"jitter_sweep", cfg.jitter_sweep},
                {"model", json::parse(canonical_model_config_json(cfg.model))},
                {"pretrain", train_config_to_json(cfg.pretrain)},
                {"finetune", train_config_to_json(cfg.finetune)},
                {"compose",
                 {{"alpha", cfg.compose.alpha},
                  {"beta", cfg.compose.beta},
                  {"sigma", cfg.compose.sigma}}},
                {"pretrain_split", cfg.pretrain_split},
                {"finetune_split", cfg.finetune_split},
                {"correction",
                 {{"max_dist", cfg.correction_cfg.max_dist}, {"gate", cfg.correction_cfg.gate}}},
                {"shader", json::parse(shader_params_json(cfg.shader))},
                {"wordlist", cfg.wordlist}}
        .dump(2);
}

ExperimentConfig experiment_config_from_json_text(const std::string& text) {
    ExperimentConfig cfg;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("bad experiment config JSON: ") + e.what());
    }
    try {
        cfg.seed = j.value("seed", cfg.seed);
        cfg.n_pretrain = j.value("n_pretrain", cfg.n_pretrain);
        cfg.n_finetune = j.value("n_finetune", cfg.n_finetune);
        cfg.n_eval = j.value("n_eval", cfg.n_eval);
        cfg.train_pattern = j.value("train_pattern", cfg.train_pattern);
        if (j.contains("test_patterns")) {
            cfg.test_patterns = j.at("test_patterns").get<std::vector<int>>();
        }
        if (j.contains("corrections")) {
            cfg.corrections.clear();
            for (const auto& c : j.at("corrections")) {
                cfg.corrections.push_back(correction_from_string(c.get<std::string>()));
            }
        }
        cfg.countermeasure = j.value("countermeasure", cfg.countermeasure);
        if (j.contains("jitter_sweep")) {
            cfg.jitter_sweep = j.at("jitter_sweep").get<std::vector<int>>();
        }
        if (j.contains("model")) cfg.model = model_config_from_json_text(j.at("model").dump());
        if (j.contains("pretrain")) {
            cfg.pretrain = train_config_from_json(j.at("pretrain"), cfg.pretrain);
        }
        if (j.contains("finetune")) {
            cfg.finetune = train_config_from_json(j.at("finetune"), cfg.finetune);
        }
        if (j.contains("compose")) {
            cfg.compose.alpha = j.at("compose").value("alpha", cfg.compose.alpha);
            cfg.compose.beta = j.at("compose").value("beta", cfg.compose.beta);
            cfg.compose.sigma = j.at("compose").value("sigma", cfg.compose.sigma);
        }
        cfg.pretrain_split = j.value("pretrain_split", cfg.pretrain_split);
        cfg.finetune_split = j.value("finetune_split", cfg.finetune_split);
        if (j.contains("correction")) {
            cfg.correction_cfg.max_dist =
                j.at("correction").value("max_dist", cfg.correction_cfg.max_dist);
            cfg.correction_cfg.gate = j.at("correction").value("gate", cfg.correction_cfg.gate);
        }
        if (j.contains("shader")) {
            cfg.shader = shader_params_from_json_text(j.at("shader").dump());
        }
        if (j.contains("wordlist")) {
            cfg.wordlist = j.at("wordlist").get<std::vector<std::string>>();
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("bad experiment config: ") + e.what());
    }
    return cfg;
}

// ---- the experiment -----------------------------------------------------

namespace {

// fixed stream tags so every stage owns an independent seed
enum SeedTag : std::uint64_t {
    kSeedClean = 11,
    kSeedFinetune = 12,
    kSeedInit = 20,
    kSeedPretrain = 21,
    kSeedFinetuneTrain = 22,
    kSeedEvalBase = 100,
    kSeedShaderBase = 300,
    kSeedJitterBase = 400,
};

struct CellSource {
    std::filesystem::path dir;
    SplitFilter filter = SplitFilter::All;
    std::uint64_t seed = 0;
};

}  // namespace

EvalReport run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    cfg.validate();
    std::error_code ec;
    std::filesystem::create_directories(out_dir / "datasets", ec);
    if (ec) throw StorageError("cannot create " + out_dir.string());

    {
        std::ofstream out(out_dir / "experiment.json", std::ios::binary);
        out << experiment_config_json(cfg) << "\n";
    }

    const std::vector<std::string>& words =
        cfg.wordlist.empty() ? default_labels() : cfg.wordlist;

    DatasetConfig base;
    base.wordlist = words;
    base.canvas_w = cfg.model.canvas_w;
    base.canvas_h = cfg.model.canvas_h;

    // clean pretraining corpus
    DatasetConfig clean = base;
    clean.n_samples = cfg.n_pretrain;
    clean.split_fraction = cfg.pretrain_split;
    clean.compose = ComposeParams{0.0, 1.0, 0.0};
    clean.seed = derive_seed(cfg.seed, kSeedClean);
    const auto clean_dir = out_dir / "datasets" / "clean";
    generate_dataset(clean, clean_dir);

    // obfuscated fine-tuning corpus (train split) + in-pattern held-out set
    DatasetConfig ft = base;
    ft.n_samples = cfg.n_finetune;
    ft.split_fraction = cfg.finetune_split;
    ft.patterns = {canonical_pattern(cfg.train_pattern)};
    ft.compose = cfg.compose;
    ft.seed = derive_seed(cfg.seed, kSeedFinetune);
    const auto ft_dir =
        out_dir / "datasets" / ("finetune_p" + std::to_string(cfg.train_pattern));
    generate_dataset(ft, ft_dir);

    // cross-pattern test sets
    std::vector<CellSource> sources(static_cast<std::size_t>(4));  // by pattern id 1..3
    for (int p : cfg.test_patterns) {
        if (p == cfg.train_pattern) {
            sources[static_cast<std::size_t>(p)] = {ft_dir, SplitFilter::EvalOnly, ft.seed};
            continue;
        }
        DatasetConfig tc = base;
        tc.n_samples = cfg.n_eval;
        tc.split_fraction = 0.5;  // split labels unused: test sets evaluate whole
        tc.patterns = {canonical_pattern(p)};
        tc.compose = cfg.compose;
        tc.seed = derive_seed(cfg.seed, kSeedEvalBase + static_cast<std::uint64_t>(p));
        const auto dir = out_dir / "datasets" / ("test_p" + std::to_string(p));
        generate_dataset(tc, dir);
        sources[static_cast<std::size_t>(p)] = {dir, SplitFilter::All, tc.seed};
    }

    // transfer-learning protocol: clean pretrain, then fine-tune
    TrainConfig pre_cfg = cfg.pretrain;
    pre_cfg.seed = derive_seed(cfg.seed, kSeedPretrain);
    auto pre = train_loop(train_data_from_dir(clean_dir, cfg.model), pre_cfg,
                          init_params(cfg.model, derive_seed(cfg.seed, kSeedInit)));
    save_checkpoint(pre.params, out_dir / "ckpt_pretrain.bin");
    pre.log.write_csv(out_dir / "pretrain_log.csv");

    TrainConfig ft_cfg = cfg.finetune;
    ft_cfg.seed = derive_seed(cfg.seed, kSeedFinetuneTrain);
    auto tuned = train_loop(train_data_from_dir(ft_dir, cfg.model), ft_cfg, pre.params);
    save_checkpoint(tuned.params, out_dir / "ckpt_finetune.bin");
    tuned.log.write_csv(out_dir / "finetune_log.csv");

    // lexicons
    const Lexicon domain_lex = Lexicon::build(words);
    const Lexicon general_lex = Lexicon::build(general_words());
    domain_lex.write_file(out_dir / "lexicon_domain.txt");
    general_lex.write_file(out_dir / "lexicon_general.txt");

    // the evaluation matrix
    EvalReport report;
    for (int p : cfg.test_patterns) {
        const CellSource& src = sources[static_cast<std::size_t>(p)];
        std::vector<std::pair<bool, CellSource>> variants{{false, src}};
        if (cfg.countermeasure) {
            ShaderParams sp = cfg.shader;
            sp.seed = derive_seed(cfg.seed, kSeedShaderBase + static_cast<std::uint64_t>(p));
            CellSource cm = src;
            cm.dir = src.dir.string() + "_cm";
            augment_dataset(src.dir, cm.dir, sp);
            variants.emplace_back(true, cm);
        }
        for (const auto& [cm_on, cell_src] : variants) {
            for (Correction corr : cfg.corrections) {
                EvalOptions opts;
                opts.correction = corr;
                opts.correction_cfg = cfg.correction_cfg;
                opts.lexicon = corr == Correction::General ? &general_lex
                               : corr == Correction::Domain ? &domain_lex
                                                            : nullptr;
                opts.filter = cell_src.filter;
                const EvalResult r = evaluate_dataset(tuned.params, cell_src.dir, opts);
                EvalCell cell;
                cell.train_pattern = cfg.train_pattern;
                cell.test_pattern = p;
                cell.correction = corr;
                cell.countermeasure = cm_on;
                cell.char_acc = r.char_acc;
                cell.word_acc = r.word_acc;
                cell.n = r.n;
                cell.seed = cell_src.seed;
                report.rows.push_back(cell);
                if (corr == Correction::None && !cm_on) {
                    for (std::size_t a = 0; a < kAlphabetSize; ++a) {
                        for (std::size_t b = 0; b < kAlphabetSize; ++b) {
                            report.confusion[a][b] += r.confusion[a][b];
                        }
                    }
                }
            }
        }
    }

    // shader misalignment sweep on the in-pattern test data
    if (cfg.countermeasure && !cfg.jitter_sweep.empty()) {
        const CellSource& src = sources[static_cast<std::size_t>(cfg.train_pattern)];
        std::ofstream jout(out_dir / "jitter.csv", std::ios::binary);
        if (!jout) throw StorageError("cannot write jitter.csv");
        jout.precision(17);
        jout << "jitter,char_acc,word_acc,n\n";
        for (int j : cfg.jitter_sweep) {
            ShaderParams sp = cfg.shader;
            sp.jitter_dx = j;
            sp.jitter_dy = j;
            sp.seed = derive_seed(cfg.seed, kSeedJitterBase + static_cast<std::uint64_t>(j));
            CellSource cm = src;
            cm.dir = src.dir.string() + "_cm_j" + std::to_string(j);
            augment_dataset(src.dir, cm.dir, sp);
            EvalOptions opts;
            opts.filter = cm.filter;
            const EvalResult r = evaluate_dataset(tuned.params, cm.dir, opts);
            jout << j << "," << r.char_acc << "," << r.word_acc << "," << r.n << "\n";
        }
    }

    emit_report(report, out_dir);
    return report;
}

// ---- report emission ----------------------------------------------------

namespace {

std::string fmt_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_chart_svg(const EvalReport& report, const std::filesystem::path& path) {
    // grouped bars: one group per test pattern, one bar per
    // (countermeasure, correction) combination, char accuracy on y
    std::vector<int> groups;
    std::vector<std::pair<bool, Correction>> series;
    for (const auto& r : report.rows) {
        if (std::find(groups.begin(), groups.end(), r.test_pattern) == groups.end()) {
            groups.push_back(r.test_pattern);
        }
        const std::pair<bool, Correction> s{r.countermeasure, r.correction};
        if (std::find(series.begin(), series.end(), s) == series.end()) series.push_back(s);
    }
    static const char* const palette[] = {"#4477aa", "#66ccee", "#228833", "#ccbb44",
                                          "#ee6677", "#aa3377", "#bbbbbb", "#222255"};
    const int width = 960, height = 420;
    const int ml = 70, mr = 30, mt = 40, mb = 90;
    const double plot_w = width - ml - mr, plot_h = height - mt - mb;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
        << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << ml << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">"
        << "Character accuracy by test pattern</text>\n";
    for (int i = 0; i <= 5; ++i) {
        const double v = i / 5.0;
        const double y = mt + plot_h * (1.0 - v);
        svg << "<line x1=\"" << ml << "\" y1=\"" << y << "\" x2=\"" << ml + plot_w
            << "\" y2=\"" << y << "\" stroke=\"#dddddd\"/>\n";
        svg << "<text x=\"" << ml - 10 << "\" y=\"" << y + 4
            << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << v
            << "</text>\n";
    }
    const double group_w = plot_w / static_cast<double>(groups.size());
    const double bar_w = group_w * 0.8 / static_cast<double>(series.size());
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        for (std::size_t si = 0; si < series.size(); ++si) {
            const EvalCell* cell = nullptr;
            for (const auto& r : report.rows) {
                if (r.test_pattern == groups[gi] && r.countermeasure == series[si].first &&
                    r.correction == series[si].second) {
                    cell = &r;
                    break;
                }
            }
            if (!cell) continue;
            const double x = ml + group_w * (static_cast<double>(gi) + 0.1) +
                             bar_w * static_cast<double>(si);
            const double h = plot_h * std::clamp(cell->char_acc, 0.0, 1.0);
            svg << "<rect x=\"" << x << "\" y=\"" << mt + plot_h - h << "\" width=\""
                << bar_w * 0.92 << "\" height=\"" << h << "\" fill=\""
                << palette[si % std::size(palette)] << "\"/>\n";
        }
        svg << "<text x=\"" << ml + group_w * (static_cast<double>(gi) + 0.5) << "\" y=\""
            << mt + plot_h + 18
            << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">"
            << "pattern " << groups[gi] << "</text>\n";
    }
    for (std::size_t si = 0; si < series.size(); ++si) {
        const double x = ml + static_cast<double>(si % 4) * 220;
        const double y = mt + plot_h + 40 + static_cast<double>(si / 4) * 20;
        svg << "<rect x=\"" << x << "\" y=\"" << y - 10 << "\" width=\"12\" height=\"12\""
            << " fill=\"" << palette[si % std::size(palette)] << "\"/>\n";
        svg << "<text x=\"" << x + 18 << "\" y=\"" << y
            << "\" font-family=\"sans-serif\" font-size=\"12\">"
            << (series[si].first ? "shader on" : "shader off") << ", "
            << to_string(series[si].second) << "</text>\n";
    }
    svg << "</svg>\n";

    std::ofstream out(path, std::ios::binary);
    if (!out) throw StorageError("cannot open for writing: " + path.string());
    out << svg.str();
    if (!out) throw StorageError("write failed: " + path.string());
}

}  // namespace

void emit_report(const EvalReport& report, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw StorageError("cannot create " + out_dir.string());

    {
        std::ofstream out(out_dir / "report.csv", std::ios::binary);
        if (!out) throw StorageError("cannot write report.csv");
        out << "train_pattern,test_pattern,correction,countermeasure,char_acc,word_acc,n,seed\n";
        for (const auto& r : report.rows) {
            out << r.train_pattern << "," << r.test_pattern << "," << to_string(r.correction)
                << "," << (r.countermeasure ? "on" : "off") << "," << fmt_g17(r.char_acc)
                << "," << fmt_g17(r.word_acc) << "," << r.n << "," << r.seed << "\n";
        }
        if (!out) throw StorageError("write failed: report.csv");
    }
    {
        std::ofstream out(out_dir / "confusion.csv", std::ios::binary);
        if (!out) throw StorageError("cannot write confusion.csv");
        out << "truth,pred,count\n";
        for (std::size_t a = 0; a < kAlphabetSize; ++a) {
            for (std::size_t b = 0; b < kAlphabetSize; ++b) {
                if (report.confusion[a][b] == 0) continue;
                out << index_to_char(static_cast<int>(a)) << ","
                    << index_to_char(static_cast<int>(b)) << "," << report.confusion[a][b]
                    << "\n";
            }
        }
    }
    write_chart_svg(report, out_dir / "chart.svg");
}

EvalReport read_report_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StorageError("cannot open for reading: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty report");
    if (line != "train_pattern,test_pattern,correction,countermeasure,char_acc,word_acc,n,seed") {
        throw FormatError("unexpected report header");
    }
    EvalReport report;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t pos = 0;
        while (true) {
            const auto comma = line.find(',', pos);
            f.push_back(line.substr(pos, comma == std::string::npos ? comma : comma - pos));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (f.size() != 8) throw FormatError("bad report row: " + line);
        EvalCell c;
        c.train_pattern = std::stoi(f[0]);
        c.test_pattern = std::stoi(f[1]);
        c.correction = correction_from_string(f[2]);
        c.countermeasure = f[3] == "on";
        c.char_acc = std::strtod(f[4].c_str(), nullptr);
        c.word_acc = std::strtod(f[5].c_str(), nullptr);
        c.n = std::stoi(f[6]);
        c.seed = std::stoull(f[7]);
        report.rows.push_back(c);
    }
    return report;
}

}  // namespace mailocr
