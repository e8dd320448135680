#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pmivec/common.hpp"
#include "pmivec/storage.hpp"

namespace pmivec {

// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> xs, std::span<const double> ys);
// Sample Pearson correlation coefficient.
double pearson(std::span<const double> xs, std::span<const double> ys);

struct WordPairScore {
    std::string a, b;
    double gold;
};

struct AnalogyQuestion {
    std::string a, a_star, b, b_star;
    std::string category;
};

struct SentencePair {
    std::vector<std::string> s1, s2;
    double gold;
};

struct SimilarityResult {
    double score = 0.0;     // spearman (word similarity) or pearson (sts)
    double coverage = 0.0;  // covered / total pairs
    std::size_t covered = 0;
    std::size_t excluded = 0;
};

// Cosine of W rows per in-vocabulary pair, Spearman against gold; OOV pairs
// excluded and counted.
SimilarityResult eval_word_similarity(const WordVectors& wv, std::span<const WordPairScore> data);

struct CategoryStats {
    std::uint64_t correct = 0;
    std::uint64_t answered = 0;
};

struct AnalogyResult {
    double accuracy = 0.0;  // exact matches / answerable questions
    std::map<std::string, CategoryStats> per_category;
    std::size_t answerable = 0;
    std::size_t unanswerable = 0;
};

// 3CosAdd over unit-normalized rows: argmax cosine with (W_b - W_a + W_a*),
// excluding the three query words.
AnalogyResult eval_analogies(const WordVectors& wv, std::span<const AnalogyQuestion> data,
                             unsigned threads = 1);

// Bag-of-vectors sentence cosine, Pearson against gold; pairs need >= 1
// covered token on both sides.
SimilarityResult eval_sts(const WordVectors& wv, std::span<const SentencePair> data);

struct HistogramSpec {
    double bucket_width = 0.2;
    double min = 0.0;
    double max = 0.0;
};

struct Histogram {
    double min = 0.0;
    double bucket_width = 0.2;
    std::vector<std::uint64_t> counts;
    std::uint64_t clamped_low = 0;   // values below range, counted in first bucket
    std::uint64_t clamped_high = 0;  // values above range, counted in last bucket

    double bucket_start(std::size_t i) const { return min + static_cast<double>(i) * bucket_width; }
};

// Bucket i covers [min + i*width, min + (i+1)*width); the last bucket is
// closed. Out-of-range values are clamped into the terminal buckets.
Histogram histogram(std::span<const double> values, const HistogramSpec& spec);

// The four reference intervals of the CPMI_z spectrum:
// [z,z], (z,0], [-2,0], (0,inf).
struct SpectrumIntervals {
    std::uint64_t at_floor = 0;
    std::uint64_t negative = 0;
    std::uint64_t minus2_to_zero = 0;
    std::uint64_t positive = 0;
};
SpectrumIntervals spectrum_intervals(std::span<const double> values, double z);

// Dataset files (see README for the exact formats).
std::vector<WordPairScore> load_word_pairs(const std::filesystem::path& path);
std::vector<AnalogyQuestion> load_analogies(const std::filesystem::path& path);
struct StsColumns {
    std::size_t gold = 0;
    std::size_t s1 = 1;
    std::size_t s2 = 2;
};
std::vector<SentencePair> load_sts(const std::filesystem::path& path, const StsColumns& cols = {});

}  // namespace pmivec
