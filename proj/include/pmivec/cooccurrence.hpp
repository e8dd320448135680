#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pmivec/common.hpp"
#include "pmivec/corpus.hpp"

namespace pmivec {

struct PositionalContext {
    WordId word;
    int offset;  // in [-window,-1] u [+1,+window]
};

// Sparse (word, context) count matrix in CSR form with cached marginals.
// With positional contexts the context id space is vocab_size * 2*window,
// laid out word_id * 2*window + offset_index with offsets ordered
// [-window..-1, +1..+window]; otherwise it equals the word id space.
struct CoocMatrix {
    std::uint32_t vocab_size = 0;
    std::uint32_t ctx_size = 0;
    std::uint32_t window = 1;
    bool positional = true;

    std::vector<std::uint64_t> row_ptr;  // vocab_size + 1
    std::vector<CtxId> cell_ctx;         // nnz, sorted within each row
    std::vector<double> cell_count;      // nnz
    std::vector<double> row_marginals;   // M_w*
    std::vector<double> col_marginals;   // M_*c
    double grand_total = 0.0;            // M_**

    std::size_t nnz() const { return cell_ctx.size(); }
    double cell(WordId w, CtxId c) const;

    CtxId context_id(WordId word, int offset) const;
    PositionalContext context_of(CtxId c) const;
    // Word the context refers to, for either layout.
    WordId context_word(CtxId c) const { return positional ? c / (2 * window) : c; }

    static std::uint32_t context_space(std::uint32_t vocab_size, std::uint32_t window,
                                       bool positional) {
        return positional ? vocab_size * 2 * window : vocab_size;
    }

    // Builds from records sorted by (word, ctx); recomputes marginals.
    static CoocMatrix from_records(std::uint32_t vocab_size, std::uint32_t window, bool positional,
                                   std::span<const std::pair<std::uint64_t, double>> sorted_cells);
};

// Slides a symmetric window over the subsampled token stream. Window truncates
// at stream boundaries; each in-window pair increments its cell by exactly 1.
// The subsample seed is derived internally for the counting pass, so the same
// user seed gives distinct counting/training subsampling decisions.
CoocMatrix count_cooccurrences(std::span<const WordId> tokens, const Vocabulary& vocab,
                               std::uint32_t window, bool positional, const SubsampleParams& sub,
                               unsigned threads = 1);

// Number of in-window (center, context) pairs over a stream of length n.
std::uint64_t window_pair_count(std::uint64_t n, std::uint32_t window);

struct SmoothedContextDistribution {
    std::vector<double> probabilities;  // sums to 1
    double alpha = 0.75;
};

// probabilities[c] = col_marginals[c]^alpha / sum_c' col_marginals[c']^alpha
SmoothedContextDistribution smoothed_context_distribution(const CoocMatrix& m, double alpha);

}  // namespace pmivec
