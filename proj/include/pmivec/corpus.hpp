#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pmivec/common.hpp"

namespace pmivec {

// Heterogeneous string hashing so lookups take string_view without allocating.
struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
    std::size_t operator()(const std::string& s) const { return std::hash<std::string_view>{}(s); }
};

struct Vocabulary {
    std::vector<std::string> words;    // id order: descending count, ties lexicographic
    std::vector<std::uint64_t> counts; // per retained word
    std::uint64_t total_tokens = 0;    // sum of retained counts
    std::uint64_t raw_tokens = 0;      // all tokens seen, including discarded ones
    std::uint64_t min_count = 1;
    std::unordered_map<std::string, WordId, StringHash, std::equal_to<>> index;

    std::size_t size() const { return words.size(); }
    std::optional<WordId> id_of(std::string_view w) const {
        auto it = index.find(w);
        if (it == index.end()) return std::nullopt;
        return it->second;
    }
    double frequency(WordId w) const {
        return static_cast<double>(counts[w]) / static_cast<double>(total_tokens);
    }
    void rebuild_index();
};

// Streaming tokenizer. Lowercases, emits maximal runs of ASCII alphanumerics;
// everything else (including any multi-byte codepoint) separates tokens.
// Malformed UTF-8 raises a Parse error naming the byte offset.
void for_each_token(std::istream& in, const std::function<void(std::string_view)>& sink);
std::vector<std::string> tokenize(std::string_view text);

// Sharded vocabulary counting; merge is order-independent.
class VocabBuilder {
public:
    void add(std::string_view token);
    void merge(VocabBuilder&& other);
    std::uint64_t tokens_seen() const { return raw_; }
    Vocabulary finish(std::uint64_t min_count) &&;

private:
    std::unordered_map<std::string, std::uint64_t, StringHash, std::equal_to<>> counts_;
    std::uint64_t raw_ = 0;
};

Vocabulary build_vocab(std::istream& text, std::uint64_t min_count);

// Maps tokens to ids, dropping out-of-vocabulary tokens.
std::vector<WordId> encode(std::istream& text, const Vocabulary& vocab);

struct SubsampleParams {
    double t = 1e-5;
    bool enabled = true;
    std::uint64_t seed = 1;

    static SubsampleParams disabled() { return {0.0, false, 0}; }
    void validate() const;
};

// Per-token discard with probability max(0, 1 - sqrt(t/f)); the decision is
// keyed on (seed, stream position), so sharded and sequential runs agree.
std::vector<WordId> subsample(std::span<const WordId> tokens, const Vocabulary& vocab,
                              const SubsampleParams& params);

// Number of tokens subsample() would retain, without materializing them.
std::uint64_t subsample_count(std::span<const WordId> tokens, const Vocabulary& vocab,
                              const SubsampleParams& params);

}  // namespace pmivec
