#include "pmivec/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pmivec {

void Vocabulary::rebuild_index() {
    index.clear();
    index.reserve(words.size());
    for (WordId id = 0; id < words.size(); ++id) index.emplace(words[id], id);
}

namespace {

inline bool is_token_char(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

inline char to_lower_ascii(unsigned char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
}

[[noreturn]] void bad_utf8(std::uint64_t offset) {
    std::ostringstream os;
    os << "invalid UTF-8 sequence at byte offset " << offset;
    throw Error(ErrorKind::Parse, os.str());
}

}  // namespace

void for_each_token(std::istream& in, const std::function<void(std::string_view)>& sink) {
    std::string token;
    std::vector<char> buf(1 << 20);
    std::uint64_t offset = 0;   // absolute byte offset of the next unread byte
    int pending_cont = 0;       // continuation bytes still expected
    unsigned char lo = 0x80, hi = 0xBF;  // valid range for the next continuation byte

    auto flush = [&] {
        if (!token.empty()) {
            sink(token);
            token.clear();
        }
    };

    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i, ++offset) {
            unsigned char c = static_cast<unsigned char>(buf[i]);
            if (pending_cont > 0) {
                if (c < lo || c > hi) bad_utf8(offset);
                lo = 0x80;
                hi = 0xBF;
                --pending_cont;
                continue;  // multi-byte codepoints act as separators
            }
            if (c < 0x80) {
                if (is_token_char(c)) {
                    token.push_back(to_lower_ascii(c));
                } else {
                    flush();
                }
            } else if (c >= 0xC2 && c <= 0xDF) {
                flush();
                pending_cont = 1;
            } else if (c >= 0xE0 && c <= 0xEF) {
                flush();
                pending_cont = 2;
                if (c == 0xE0) lo = 0xA0;
                if (c == 0xED) hi = 0x9F;
            } else if (c >= 0xF0 && c <= 0xF4) {
                flush();
                pending_cont = 3;
                if (c == 0xF0) lo = 0x90;
                if (c == 0xF4) hi = 0x8F;
            } else {
                bad_utf8(offset);  // stray continuation byte or invalid lead
            }
        }
        if (got == 0) break;
    }
    if (pending_cont > 0) bad_utf8(offset);  // truncated sequence at EOF
    flush();
}

std::vector<std::string> tokenize(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::vector<std::string> out;
    for_each_token(in, [&](std::string_view t) { out.emplace_back(t); });
    return out;
}

void VocabBuilder::add(std::string_view token) {
    ++raw_;
    auto it = counts_.find(token);
    if (it == counts_.end()) {
        counts_.emplace(std::string(token), 1);
    } else {
        ++it->second;
    }
}

void VocabBuilder::merge(VocabBuilder&& other) {
    raw_ += other.raw_;
    for (auto& [word, n] : other.counts_) counts_[word] += n;
    other.counts_.clear();
    other.raw_ = 0;
}

Vocabulary VocabBuilder::finish(std::uint64_t min_count) && {
    if (min_count < 1) throw Error(ErrorKind::Usage, "min_count must be >= 1");
    Vocabulary v;
    v.min_count = min_count;
    v.raw_tokens = raw_;
    std::vector<std::pair<std::string, std::uint64_t>> kept;
    kept.reserve(counts_.size());
    for (auto& [word, n] : counts_) {
        if (n >= min_count) kept.emplace_back(word, n);
    }
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    v.words.reserve(kept.size());
    v.counts.reserve(kept.size());
    for (auto& [word, n] : kept) {
        v.words.push_back(std::move(word));
        v.counts.push_back(n);
        v.total_tokens += n;
    }
    v.rebuild_index();
    return v;
}

Vocabulary build_vocab(std::istream& text, std::uint64_t min_count) {
    VocabBuilder b;
    for_each_token(text, [&](std::string_view t) { b.add(t); });
    return std::move(b).finish(min_count);
}

std::vector<WordId> encode(std::istream& text, const Vocabulary& vocab) {
    std::vector<WordId> ids;
    for_each_token(text, [&](std::string_view t) {
        if (auto id = vocab.id_of(t)) ids.push_back(*id);
    });
    return ids;
}

void SubsampleParams::validate() const {
    if (enabled && !(t > 0.0))
        throw Error(ErrorKind::Usage, "subsample threshold t must be > 0 when enabled");
}

namespace {

// keep probability per word id: min(1, sqrt(t/f))
std::vector<double> keep_probs(const Vocabulary& vocab, double t) {
    std::vector<double> p(vocab.size());
    for (WordId w = 0; w < vocab.size(); ++w) {
        double f = vocab.frequency(w);
        p[w] = f <= t ? 1.0 : std::sqrt(t / f);
    }
    return p;
}

}  // namespace

std::vector<WordId> subsample(std::span<const WordId> tokens, const Vocabulary& vocab,
                              const SubsampleParams& params) {
    params.validate();
    if (!params.enabled) return {tokens.begin(), tokens.end()};
    std::vector<double> keep = keep_probs(vocab, params.t);
    std::vector<WordId> out;
    out.reserve(tokens.size());
    for (std::size_t pos = 0; pos < tokens.size(); ++pos) {
        WordId w = tokens[pos];
        if (w >= vocab.size()) throw Error(ErrorKind::Domain, "token id out of vocabulary range");
        if (hash01(params.seed, pos) < keep[w]) out.push_back(w);
    }
    return out;
}

std::uint64_t subsample_count(std::span<const WordId> tokens, const Vocabulary& vocab,
                              const SubsampleParams& params) {
    params.validate();
    if (!params.enabled) return tokens.size();
    std::vector<double> keep = keep_probs(vocab, params.t);
    std::uint64_t n = 0;
    for (std::size_t pos = 0; pos < tokens.size(); ++pos) {
        WordId w = tokens[pos];
        if (w >= vocab.size()) throw Error(ErrorKind::Domain, "token id out of vocabulary range");
        if (hash01(params.seed, pos) < keep[w]) ++n;
    }
    return n;
}

}  // namespace pmivec
