#include "pmivec/storage.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace pmivec {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void io_error(const fs::path& path, const std::string& what) {
    std::ostringstream os;
    os << what << ": " << path.string();
    throw Error(ErrorKind::Io, os.str());
}

[[noreturn]] void parse_error(const fs::path& path, std::size_t line, const std::string& what) {
    std::ostringstream os;
    os << path.string() << ":" << line << ": " << what;
    throw Error(ErrorKind::Parse, os.str());
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode);
    if (!out) io_error(path, "cannot open for writing");
    return out;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) io_error(path, "cannot open for reading");
    return in;
}

std::uint64_t parse_u64(std::string_view s, const fs::path& path, std::size_t line) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        parse_error(path, line, "expected unsigned integer, got '" + std::string(s) + "'");
    return v;
}

double parse_f64(std::string_view s, const fs::path& path, std::size_t line) {
    // std::from_chars<double> is incomplete on some libstdc++ versions
    std::string tmp(s);
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(tmp.c_str(), &end);
    if (errno != 0 || end != tmp.c_str() + tmp.size() || tmp.empty())
        parse_error(path, line, "expected real number, got '" + std::string(s) + "'");
    return v;
}

void format_value(char* buf, std::size_t cap, double v) { std::snprintf(buf, cap, "%.6g", v); }

}  // namespace

void save_vocabulary(const Vocabulary& vocab, const fs::path& path) {
    std::ofstream out = open_out(path);
    out << "#total_tokens\t" << vocab.total_tokens << "\n";
    for (std::size_t i = 0; i < vocab.size(); ++i)
        out << vocab.words[i] << "\t" << vocab.counts[i] << "\n";
    if (!out) io_error(path, "write failed");
}

Vocabulary load_vocabulary(const fs::path& path) {
    std::ifstream in = open_in(path);
    Vocabulary v;
    std::string line;
    std::size_t lineno = 0;

    if (!std::getline(in, line)) parse_error(path, 1, "missing header");
    ++lineno;
    if (!line.starts_with("#total_tokens\t")) parse_error(path, 1, "expected '#total_tokens<TAB>N' header");
    std::uint64_t declared_total = parse_u64(line.substr(14), path, 1);

    std::uint64_t prev_count = 0;
    std::string prev_word;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) parse_error(path, lineno, "empty line");
        auto tab = line.find('\t');
        if (tab == std::string::npos) parse_error(path, lineno, "expected 'word<TAB>count'");
        std::string word = line.substr(0, tab);
        std::uint64_t count = parse_u64(std::string_view(line).substr(tab + 1), path, lineno);
        if (count == 0) parse_error(path, lineno, "zero count");
        if (v.index.contains(word)) parse_error(path, lineno, "duplicate word '" + word + "'");
        if (!v.words.empty()) {
            bool ordered = count < prev_count || (count == prev_count && word > prev_word);
            if (!ordered) parse_error(path, lineno, "words not in (count desc, word asc) id order");
        }
        v.index.emplace(word, static_cast<WordId>(v.words.size()));
        v.words.push_back(std::move(word));
        v.counts.push_back(count);
        v.total_tokens += count;
        prev_count = count;
        prev_word = v.words.back();
    }
    if (v.total_tokens != declared_total)
        parse_error(path, lineno, "counts do not sum to declared total_tokens");
    v.raw_tokens = v.total_tokens;  // raw statistic is not part of the format
    v.min_count = v.counts.empty() ? 1 : v.counts.back();
    return v;
}

void save_embeddings(const Matrix& rows, std::span<const std::string> labels,
                     const fs::path& path) {
    if (labels.size() != rows.rows)
        throw Error(ErrorKind::Usage, "label count does not match embedding rows");
    std::ofstream out = open_out(path);
    out << rows.rows << " " << rows.cols << "\n";
    char buf[64];
    for (std::size_t i = 0; i < rows.rows; ++i) {
        out << labels[i];
        for (double v : rows.row(i)) {
            format_value(buf, sizeof buf, v);
            out << " " << buf;
        }
        out << "\n";
    }
    if (!out) io_error(path, "write failed");
}

void save_embeddings(const Embeddings& emb, const Vocabulary& vocab, const fs::path& path) {
    if (vocab.size() != emb.W.rows)
        throw Error(ErrorKind::Usage, "vocabulary does not match embedding rows");
    save_embeddings(emb.W, vocab.words, path);
}

void save_context_embeddings(const Embeddings& emb, const Vocabulary& vocab, const CoocMatrix& m,
                             const fs::path& path) {
    if (m.ctx_size != emb.C.rows)
        throw Error(ErrorKind::Usage, "matrix context space does not match embedding rows");
    std::vector<std::string> labels(m.ctx_size);
    for (std::uint32_t c = 0; c < m.ctx_size; ++c) {
        if (m.positional) {
            PositionalContext pc = m.context_of(c);
            std::ostringstream os;
            os << vocab.words.at(pc.word) << "@" << (pc.offset > 0 ? "+" : "") << pc.offset;
            labels[c] = os.str();
        } else {
            labels[c] = vocab.words.at(c);
        }
    }
    save_embeddings(emb.C, labels, path);
}

WordVectors load_embeddings(const fs::path& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) parse_error(path, 1, "missing header");
    std::istringstream header(line);
    std::size_t rows = 0, dim = 0;
    if (!(header >> rows >> dim) || !(header >> std::ws).eof())
        parse_error(path, 1, "expected header 'vocab_size dim'");
    if (rows == 0 || dim == 0) parse_error(path, 1, "vocab_size and dim must be positive");

    WordVectors wv;
    wv.W = Matrix(rows, dim);
    wv.words.reserve(rows);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (wv.words.size() == rows) parse_error(path, lineno, "more rows than declared");
        std::size_t start = line.find(' ');
        if (start == std::string::npos || start == 0) parse_error(path, lineno, "expected 'word v1 ... v_dim'");
        std::string word = line.substr(0, start);
        if (wv.index.contains(word)) parse_error(path, lineno, "duplicate word '" + word + "'");

        double* row = wv.W.row_ptr(wv.words.size());
        std::size_t got = 0;
        std::size_t pos = start;
        while (pos < line.size()) {
            while (pos < line.size() && line[pos] == ' ') ++pos;
            if (pos == line.size()) break;
            std::size_t end = line.find(' ', pos);
            if (end == std::string::npos) end = line.size();
            if (got == dim) parse_error(path, lineno, "row has more than dim values");
            row[got++] = parse_f64(std::string_view(line).substr(pos, end - pos), path, lineno);
            pos = end;
        }
        if (got != dim) parse_error(path, lineno, "row has fewer than dim values");
        wv.index.emplace(word, static_cast<WordId>(wv.words.size()));
        wv.words.push_back(std::move(word));
    }
    if (wv.words.size() != rows) parse_error(path, lineno + 1, "fewer rows than declared");
    return wv;
}

namespace {

constexpr char kCoocMagic[4] = {'C', 'O', 'O', 'C'};
constexpr std::uint32_t kCoocVersion = 1;

template <class T>
void put(std::ofstream& out, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));  // x86-64: native order is little-endian
    out.write(buf, sizeof(T));
}

template <class T>
T get(std::ifstream& in, const fs::path& path) {
    char buf[sizeof(T)];
    in.read(buf, sizeof(T));
    if (in.gcount() != sizeof(T)) parse_error(path, 0, "truncated file");
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

}  // namespace

void save_cooc(const CoocMatrix& m, const fs::path& path) {
    std::ofstream out = open_out(path, std::ios::binary);
    out.write(kCoocMagic, 4);
    put<std::uint32_t>(out, kCoocVersion);
    put<std::uint32_t>(out, m.vocab_size);
    put<std::uint32_t>(out, m.ctx_size);
    put<std::uint32_t>(out, m.window);
    put<std::uint8_t>(out, m.positional ? 1 : 0);
    put<double>(out, m.grand_total);
    for (std::uint32_t w = 0; w < m.vocab_size; ++w) {
        for (std::uint64_t i = m.row_ptr[w]; i < m.row_ptr[w + 1]; ++i) {
            put<std::uint32_t>(out, w);
            put<std::uint32_t>(out, m.cell_ctx[i]);
            put<double>(out, m.cell_count[i]);
        }
    }
    if (!out) io_error(path, "write failed");
}

CoocMatrix load_cooc(const fs::path& path) {
    std::ifstream in = open_in(path, std::ios::binary);
    char magic[4];
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, kCoocMagic, 4) != 0)
        parse_error(path, 0, "bad magic: not a cooccurrence file");
    std::uint32_t version = get<std::uint32_t>(in, path);
    if (version != kCoocVersion) parse_error(path, 0, "unsupported format version");
    std::uint32_t vocab_size = get<std::uint32_t>(in, path);
    std::uint32_t ctx_size = get<std::uint32_t>(in, path);
    std::uint32_t window = get<std::uint32_t>(in, path);
    std::uint8_t positional = get<std::uint8_t>(in, path);
    double grand_total = get<double>(in, path);
    if (positional > 1) parse_error(path, 0, "invalid positional flag");
    if (window < 1) parse_error(path, 0, "invalid window");
    if (ctx_size != CoocMatrix::context_space(vocab_size, window, positional != 0))
        parse_error(path, 0, "context-space size inconsistent with vocab size and window");

    std::vector<std::pair<std::uint64_t, double>> cells;
    while (true) {
        char rec[16];
        in.read(rec, 16);
        std::streamsize got = in.gcount();
        if (got == 0) break;
        if (got != 16) parse_error(path, 0, "truncated record");
        std::uint32_t w, c;
        double count;
        std::memcpy(&w, rec, 4);
        std::memcpy(&c, rec + 4, 4);
        std::memcpy(&count, rec + 8, 8);
        cells.emplace_back((static_cast<std::uint64_t>(w) << 32) | c, count);
    }

    CoocMatrix m;
    try {
        m = CoocMatrix::from_records(vocab_size, window, positional != 0, cells);
    } catch (const Error& e) {
        parse_error(path, 0, e.what());
    }
    // marginal verification against the stored grand total
    double rel = std::abs(m.grand_total - grand_total) /
                 std::max(1.0, std::max(std::abs(grand_total), std::abs(m.grand_total)));
    if (rel > 1e-9)
        parse_error(path, 0, "recomputed marginals do not match stored grand total (corrupt counts)");
    return m;
}

}  // namespace pmivec
