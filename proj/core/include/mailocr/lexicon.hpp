#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mailocr {

// Levenshtein distance with unit insert/delete/substitute costs.
int edit_distance(std::string_view a, std::string_view b);

struct LexiconEntry {
    std::string word;
    double frequency = 1.0;
};

// Immutable word collection. Entries are normalized to the alphabet
// (uppercased; anything unrepresentable is rejected) and kept sorted so
// tie-breaking by lexicographic order falls out of the scan order.
class Lexicon {
public:
    static Lexicon build(const std::vector<std::string>& words);
    static Lexicon build(const std::vector<std::pair<std::string, double>>& weighted);

    // Plain text, one entry per line: WORD[<TAB>frequency].
    static Lexicon read_file(const std::filesystem::path& path);
    void write_file(const std::filesystem::path& path) const;

    bool contains(const std::string& word) const;
    double frequency(const std::string& word) const;  // 0 when absent
    const std::vector<LexiconEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

private:
    std::vector<LexiconEntry> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct CorrectionConfig {
    int max_dist = 2;    // general correction acceptance radius
    double gate = 0.3;   // minimum mean per-character confidence

    void validate() const;
};

// Dictionary spell check: words already in the lexicon pass through; other
// words move to the nearest entry within max_dist. Ties break by higher
// frequency, then lexicographic order. Nothing in range leaves the word
// unchanged.
std::string correct_general(const std::string& word, const Lexicon& lex,
                            const CorrectionConfig& cfg);

// Confidence-weighted alignment cost: substituting or deleting the
// predicted character at position i costs confidences[i], inserting a
// character costs 1.
double weighted_distance(const std::string& word, const std::vector<double>& confidences,
                         const std::string& candidate);

// Domain correction against an exhaustive label collection. Suppressed
// entirely when the mean confidence is below cfg.gate; otherwise returns
// the entry with the lowest confidence-weighted cost, however far away
// (ties as in correct_general).
std::string correct_domain(const std::string& word, const std::vector<double>& confidences,
                           const Lexicon& lex, const CorrectionConfig& cfg);

}  // namespace mailocr
