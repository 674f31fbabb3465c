#include "mailocr/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>

#include "mailocr/errors.hpp"
#include "mailocr/font.hpp"

namespace mailocr {

int edit_distance(std::string_view a, std::string_view b) {
    const std::size_t n = a.size(), m = b.size();
    if (n == 0) return static_cast<int>(m);
    if (m == 0) return static_cast<int>(n);
    // two-row dynamic program
    std::vector<int> prev(m + 1), cur(m + 1);
    std::iota(prev.begin(), prev.end(), 0);
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = static_cast<int>(i);
        for (std::size_t j = 1; j <= m; ++j) {
            const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

namespace {

std::string normalize_word(const std::string& raw) {
    std::string word;
    word.reserve(raw.size());
    for (char c : raw) {
        const char u = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        if (!in_alphabet(u)) {
            throw AlphabetError("lexicon word '" + raw + "' has unrepresentable character");
        }
        word.push_back(u);
    }
    return word;
}

}  // namespace

Lexicon Lexicon::build(const std::vector<std::string>& words) {
    std::vector<std::pair<std::string, double>> weighted;
    weighted.reserve(words.size());
    for (const auto& w : words) weighted.emplace_back(w, 1.0);
    return build(weighted);
}

Lexicon Lexicon::build(const std::vector<std::pair<std::string, double>>& weighted) {
    Lexicon lex;
    std::unordered_map<std::string, double> merged;
    for (const auto& [raw, freq] : weighted) {
        if (freq < 0) throw ContractError("lexicon frequency must be non-negative");
        merged[normalize_word(raw)] += freq;
    }
    lex.entries_.reserve(merged.size());
    for (auto& [word, freq] : merged) lex.entries_.push_back({word, freq});
    std::sort(lex.entries_.begin(), lex.entries_.end(),
              [](const LexiconEntry& a, const LexiconEntry& b) { return a.word < b.word; });
    for (std::size_t i = 0; i < lex.entries_.size(); ++i) {
        lex.index_[lex.entries_[i].word] = i;
    }
    return lex;
}

Lexicon Lexicon::read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StorageError("cannot open for reading: " + path.string());
    std::vector<std::pair<std::string, double>> weighted;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
            weighted.emplace_back(line, 1.0);
        } else {
            const std::string word = line.substr(0, tab);
            try {
                weighted.emplace_back(word, std::stod(line.substr(tab + 1)));
            } catch (const std::exception&) {
                throw FormatError("bad frequency on lexicon line: " + line);
            }
        }
    }
    return build(weighted);
}

void Lexicon::write_file(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw StorageError("cannot open for writing: " + path.string());
    out.precision(17);
    for (const auto& e : entries_) out << e.word << "\t" << e.frequency << "\n";
    if (!out) throw StorageError("write failed: " + path.string());
}

bool Lexicon::contains(const std::string& word) const { return index_.count(word) > 0; }

double Lexicon::frequency(const std::string& word) const {
    const auto it = index_.find(word);
    return it == index_.end() ? 0.0 : entries_[it->second].frequency;
}

void CorrectionConfig::validate() const {
    if (max_dist < 0) throw ConfigError("max_dist must be >= 0");
    if (!(gate >= 0.0 && gate <= 1.0)) throw ConfigError("gate must be in [0,1]");
}

std::string correct_general(const std::string& word, const Lexicon& lex,
                            const CorrectionConfig& cfg) {
    cfg.validate();
    if (lex.contains(word)) return word;
    const LexiconEntry* best = nullptr;
    int best_dist = cfg.max_dist + 1;
    for (const auto& e : lex.entries()) {
        const auto len_gap = e.word.size() > word.size() ? e.word.size() - word.size()
                                                         : word.size() - e.word.size();
        if (static_cast<int>(len_gap) > cfg.max_dist) continue;
        const int d = edit_distance(word, e.word);
        if (d < best_dist || (d == best_dist && best && e.frequency > best->frequency)) {
            best = &e;
            best_dist = d;
        }
        // equal distance and frequency keeps the earlier (smaller) word
    }
    return best ? best->word : word;
}

double weighted_distance(const std::string& word, const std::vector<double>& confidences,
                         const std::string& candidate) {
    if (word.size() != confidences.size()) {
        throw ContractError("confidences length must equal word length");
    }
    const std::size_t n = word.size(), m = candidate.size();
    std::vector<double> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = static_cast<double>(j);  // inserts cost 1
    for (std::size_t i = 1; i <= n; ++i) {
        const double ci = confidences[i - 1];
        cur[0] = prev[0] + ci;  // deleting a predicted character costs its confidence
        for (std::size_t j = 1; j <= m; ++j) {
            const double sub = prev[j - 1] + (word[i - 1] == candidate[j - 1] ? 0.0 : ci);
            cur[j] = std::min({prev[j] + ci, cur[j - 1] + 1.0, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

std::string correct_domain(const std::string& word, const std::vector<double>& confidences,
                           const Lexicon& lex, const CorrectionConfig& cfg) {
    cfg.validate();
    if (word.size() != confidences.size()) {
        throw ContractError("confidences length must equal word length");
    }
    if (lex.size() == 0) return word;
    const double mean =
        confidences.empty()
            ? 0.0
            : std::accumulate(confidences.begin(), confidences.end(), 0.0) /
                  static_cast<double>(confidences.size());
    if (mean < cfg.gate) return word;  // low-confidence regime: leave it alone

    const LexiconEntry* best = nullptr;
    double best_cost = 0;
    for (const auto& e : lex.entries()) {
        const double cost = weighted_distance(word, confidences, e.word);
        if (!best || cost < best_cost ||
            (cost == best_cost && e.frequency > best->frequency)) {
            best = &e;
            best_cost = cost;
        }
    }
    return best->word;
}

}  // namespace mailocr
