#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "pmivec/common.hpp"
#include "pmivec/cooccurrence.hpp"
#include "pmivec/corpus.hpp"
#include "pmivec/factorizer.hpp"

namespace pmivec {

// Word vectors as read back from an embedding file (W only).
struct WordVectors {
    std::vector<std::string> words;
    Matrix W;
    std::unordered_map<std::string, WordId, StringHash, std::equal_to<>> index;

    std::size_t dim() const { return W.cols; }
    std::optional<WordId> id_of(std::string_view w) const {
        auto it = index.find(w);
        if (it == index.end()) return std::nullopt;
        return it->second;
    }
};

// Vocabulary file: header "#total_tokens<TAB>N", then "word<TAB>count" per
// word in id order, UTF-8, trailing newline.
void save_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path);
Vocabulary load_vocabulary(const std::filesystem::path& path);

// Embedding file: header "vocab_size dim", one "word v1 ... v_dim" line per
// row, values with 6 significant digits.
void save_embeddings(const Matrix& rows, std::span<const std::string> labels,
                     const std::filesystem::path& path);
void save_embeddings(const Embeddings& emb, const Vocabulary& vocab,
                     const std::filesystem::path& path);
// Context rows use "word@offset" labels (e.g. "cat@+1") when positional.
void save_context_embeddings(const Embeddings& emb, const Vocabulary& vocab, const CoocMatrix& m,
                             const std::filesystem::path& path);
WordVectors load_embeddings(const std::filesystem::path& path);

// Cooccurrence file: binary, little-endian; header = magic "COOC", version,
// vocab size, context-space size, window, positional flag, grand total; then
// (word_id u32, ctx_id u32, count f64) records sorted by (word_id, ctx_id).
// The loader recomputes marginals and verifies them against the stored total.
void save_cooc(const CoocMatrix& m, const std::filesystem::path& path);
CoocMatrix load_cooc(const std::filesystem::path& path);

}  // namespace pmivec
