#include "mailocr/dataset.hpp"

#include <fstream>

#include <json.hpp>

#include "mailocr/errors.hpp"
#include "mailocr/font.hpp"
#include "mailocr/rng.hpp"

namespace mailocr {

using nlohmann::json;

const char* to_string(Split s) { return s == Split::Train ? "train" : "eval"; }

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "eval") return Split::Eval;
    throw FormatError("unknown split: " + s);
}

void DatasetConfig::validate() const {
    if (n_samples < 1) throw ConfigError("n_samples must be >= 1");
    if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
        throw ConfigError("split_fraction must be in (0,1)");
    }
    if (wordlist.empty()) throw ConfigError("wordlist must not be empty");
    for (const auto& w : wordlist) {
        if (w.empty()) throw ConfigError("wordlist entries must be non-empty");
        validate_label(w);
        if (rendered_width(w, canvas_h) > canvas_w) {
            throw CapacityError("wordlist entry '" + w + "' does not fit the canvas");
        }
    }
    for (const auto& p : patterns) p.validate();
    compose.validate();
}

namespace {

json pattern_to_json(const PatternSpec& p) {
    return json{{"kind", to_string(p.kind)},
                {"period", p.period},
                {"stroke", p.stroke},
                {"ink", p.ink},
                {"phase", {p.phase_dx, p.phase_dy}},
                {"seed", p.seed}};
}

PatternSpec pattern_from_json(const json& j) {
    PatternSpec p;
    p.kind = pattern_kind_from_string(j.at("kind").get<std::string>());
    p.period = j.at("period").get<int>();
    p.stroke = j.at("stroke").get<int>();
    p.ink = j.at("ink").get<double>();
    if (j.contains("phase")) {
        p.phase_dx = j.at("phase").at(0).get<int>();
        p.phase_dy = j.at("phase").at(1).get<int>();
    }
    p.seed = j.value("seed", std::uint64_t{0});
    return p;
}

json compose_to_json(const ComposeParams& c) {
    return json{{"alpha", c.alpha}, {"beta", c.beta}, {"sigma", c.sigma}};
}

ComposeParams compose_from_json(const json& j) {
    ComposeParams c;
    c.alpha = j.value("alpha", c.alpha);
    c.beta = j.value("beta", c.beta);
    c.sigma = j.value("sigma", c.sigma);
    return c;
}

json config_to_json(const DatasetConfig& cfg) {
    json patterns = json::array();
    for (const auto& p : cfg.patterns) patterns.push_back(pattern_to_json(p));
    return json{{"wordlist", cfg.wordlist},
                {"n_samples", cfg.n_samples},
                {"split_fraction", cfg.split_fraction},
                {"canvas", {cfg.canvas_w, cfg.canvas_h}},
                {"patterns", patterns},
                {"compose", compose_to_json(cfg.compose)},
                {"seed", cfg.seed}};
}

DatasetConfig config_from_json(const json& j) {
    DatasetConfig cfg;
    cfg.wordlist = j.at("wordlist").get<std::vector<std::string>>();
    cfg.n_samples = j.value("n_samples", cfg.n_samples);
    cfg.split_fraction = j.value("split_fraction", cfg.split_fraction);
    if (j.contains("canvas")) {
        cfg.canvas_w = j.at("canvas").at(0).get<int>();
        cfg.canvas_h = j.at("canvas").at(1).get<int>();
    }
    if (j.contains("patterns")) {
        for (const auto& p : j.at("patterns")) cfg.patterns.push_back(pattern_from_json(p));
    }
    if (j.contains("compose")) cfg.compose = compose_from_json(j.at("compose"));
    cfg.seed = j.value("seed", std::uint64_t{0});
    return cfg;
}

std::string hash_hex(std::uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return s;
}

std::uint64_t hash_from_hex(const std::string& s) {
    if (s.size() != 16) throw FormatError("config_hash must be 16 hex digits");
    std::uint64_t h = 0;
    for (char c : s) {
        h <<= 4;
        if (c >= '0' && c <= '9') h |= static_cast<std::uint64_t>(c - '0');
        else if (c >= 'a' && c <= 'f') h |= static_cast<std::uint64_t>(c - 'a' + 10);
        else throw FormatError("config_hash must be lowercase hex");
    }
    return h;
}

std::string image_file_name(std::int64_t id) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "images/%06lld.pgm", static_cast<long long>(id));
    return buf;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string canonical_dataset_config_json(const DatasetConfig& cfg) {
    // nlohmann objects keep keys sorted, so dump() is canonical
    return config_to_json(cfg).dump();
}

DatasetConfig dataset_config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("bad dataset config JSON: ") + e.what());
    }
    try {
        return config_from_json(j);
    } catch (const json::exception& e) {
        throw FormatError(std::string("bad dataset config: ") + e.what());
    }
}

void write_dataset_config(const DatasetConfig& cfg, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw StorageError("cannot open for writing: " + path.string());
    out << canonical_dataset_config_json(cfg) << "\n";
    if (!out) throw StorageError("write failed: " + path.string());
}

DatasetConfig read_dataset_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StorageError("cannot open for reading: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return dataset_config_from_json_text(text);
}

SamplePlan plan_sample(const DatasetConfig& cfg, std::int64_t i) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
    SamplePlan plan;
    plan.label = cfg.wordlist[rng.index(cfg.wordlist.size())];
    plan.pattern_index =
        cfg.patterns.empty() ? -1 : static_cast<int>(rng.index(cfg.patterns.size()));
    plan.split = rng.uniform() < cfg.split_fraction ? Split::Train : Split::Eval;
    plan.compose_seed = rng.next();
    return plan;
}

GrayImage plan_text_image(const DatasetConfig& cfg, const SamplePlan& plan) {
    return render_text(plan.label, cfg.canvas_w, cfg.canvas_h);
}

GrayImage plan_pattern_image(const DatasetConfig& cfg, const SamplePlan& plan) {
    if (plan.pattern_index < 0) return GrayImage(cfg.canvas_w, cfg.canvas_h, 1.0f);
    return synth_pattern(cfg.patterns[static_cast<std::size_t>(plan.pattern_index)],
                         cfg.canvas_w, cfg.canvas_h);
}

Manifest generate_dataset(const DatasetConfig& cfg, const std::filesystem::path& out_dir) {
    cfg.validate();
    std::error_code ec;
    std::filesystem::create_directories(out_dir / "images", ec);
    if (ec) throw StorageError("cannot create " + (out_dir / "images").string());

    Manifest m;
    m.config_hash = fnv1a64(canonical_dataset_config_json(cfg));
    m.schema_version = 1;
    m.records.reserve(static_cast<std::size_t>(cfg.n_samples));
    for (std::int64_t i = 0; i < cfg.n_samples; ++i) {
        const SamplePlan plan = plan_sample(cfg, i);
        const GrayImage sample = compose_sample(plan_text_image(cfg, plan),
                                                plan_pattern_image(cfg, plan),
                                                cfg.compose, plan.compose_seed);
        SampleRecord rec;
        rec.id = i;
        rec.label = plan.label;
        rec.pattern_id = plan.pattern_index;
        rec.split = plan.split;
        rec.image_path = image_file_name(i);
        write_pgm(sample, out_dir / rec.image_path);
        m.records.push_back(std::move(rec));
    }
    write_manifest(m, out_dir / "manifest.jsonl");
    write_dataset_config(cfg, out_dir / "config.json");
    return m;
}

void write_manifest(const Manifest& m, const std::filesystem::path& manifest_path) {
    std::ofstream out(manifest_path, std::ios::binary);
    if (!out) throw StorageError("cannot open for writing: " + manifest_path.string());
    out << json{{"config_hash", hash_hex(m.config_hash)},
                {"schema_version", m.schema_version}}
               .dump()
        << "\n";
    for (const auto& r : m.records) {
        json rec{{"id", r.id},
                 {"label", r.label},
                 {"split", to_string(r.split)},
                 {"image_path", r.image_path}};
        if (r.pattern_id < 0) {
            rec["pattern_id"] = nullptr;
        } else {
            rec["pattern_id"] = r.pattern_id;
        }
        out << rec.dump() << "\n";
    }
    if (!out) throw StorageError("write failed: " + manifest_path.string());
}

Manifest read_manifest(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path, std::ios::binary);
    if (!in) throw StorageError("cannot open for reading: " + manifest_path.string());
    Manifest m;
    std::string line;
    bool header = true;
    std::int64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw FormatError("manifest line " + std::to_string(line_no) + ": " + e.what());
        }
        try {
            if (header) {
                m.config_hash = hash_from_hex(j.at("config_hash").get<std::string>());
                m.schema_version = j.at("schema_version").get<int>();
                header = false;
                continue;
            }
            SampleRecord r;
            r.id = j.at("id").get<std::int64_t>();
            r.label = j.at("label").get<std::string>();
            r.pattern_id = j.at("pattern_id").is_null() ? -1 : j.at("pattern_id").get<int>();
            r.split = split_from_string(j.at("split").get<std::string>());
            r.image_path = j.at("image_path").get<std::string>();
            m.records.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw FormatError("manifest line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (header) throw FormatError("manifest has no header line");
    return m;
}

std::vector<LoadedSample> load_dataset(const std::filesystem::path& dir) {
    const Manifest m = read_manifest(dir / "manifest.jsonl");
    std::vector<LoadedSample> samples;
    samples.reserve(m.records.size());
    for (const auto& r : m.records) {
        LoadedSample s;
        s.id = r.id;
        s.label = r.label;
        s.pattern_id = r.pattern_id;
        s.split = r.split;
        s.image = read_pgm(dir / r.image_path);
        samples.push_back(std::move(s));
    }
    return samples;
}

}  // namespace mailocr
