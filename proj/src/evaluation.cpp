#include "pmivec/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "pmivec/corpus.hpp"

namespace pmivec {

namespace {

std::vector<double> average_ranks(std::span<const double> xs) {
    const std::size_t n = xs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
        double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double cosine(std::span<const double> a, std::span<const double> b) {
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    double denom = std::sqrt(aa) * std::sqrt(bb);
    return denom > 0.0 ? ab / denom : 0.0;
}

}  // namespace

double pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw Error(ErrorKind::Usage, "correlation inputs differ in length");
    const std::size_t n = xs.size();
    if (n < 2) throw Error(ErrorKind::Domain, "correlation needs at least 2 points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = xs[i] - mx;
        double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw Error(ErrorKind::Domain, "correlation undefined: zero variance");
    return sxy / (std::sqrt(sxx) * std::sqrt(syy));
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw Error(ErrorKind::Usage, "correlation inputs differ in length");
    if (xs.size() < 2) throw Error(ErrorKind::Domain, "correlation needs at least 2 points");
    std::vector<double> rx = average_ranks(xs);
    std::vector<double> ry = average_ranks(ys);
    try {
        return pearson(rx, ry);
    } catch (const Error&) {
        throw Error(ErrorKind::Domain, "correlation undefined: zero rank variance");
    }
}

SimilarityResult eval_word_similarity(const WordVectors& wv, std::span<const WordPairScore> data) {
    SimilarityResult r;
    std::vector<double> model, gold;
    for (const auto& p : data) {
        auto a = wv.id_of(p.a);
        auto b = wv.id_of(p.b);
        if (!a || !b) {
            ++r.excluded;
            continue;
        }
        model.push_back(cosine(wv.W.row(*a), wv.W.row(*b)));
        gold.push_back(p.gold);
    }
    r.covered = model.size();
    if (r.covered == 0) throw Error(ErrorKind::Domain, "no word pair is covered by the vocabulary");
    r.coverage = static_cast<double>(r.covered) / static_cast<double>(data.size());
    r.score = spearman(model, gold);
    return r;
}

AnalogyResult eval_analogies(const WordVectors& wv, std::span<const AnalogyQuestion> data,
                             unsigned threads) {
    if (threads < 1) threads = 1;
    const std::size_t n_words = wv.words.size();
    const std::size_t dim = wv.dim();

    // unit-normalized copy; zero rows stay zero
    Matrix norm(n_words, dim);
    for (std::size_t i = 0; i < n_words; ++i) {
        auto src = wv.W.row(i);
        double nrm = std::sqrt(dot(src, src));
        double* dst = norm.row_ptr(i);
        if (nrm > 0.0)
            for (std::size_t j = 0; j < dim; ++j) dst[j] = src[j] / nrm;
    }

    struct Outcome {
        std::size_t question;
        bool correct;
    };
    std::vector<std::vector<Outcome>> outcomes(threads);
    std::vector<std::size_t> answerable(threads, 0), unanswerable(threads, 0);

    auto work = [&](unsigned tid) {
        for (std::size_t qi = tid; qi < data.size(); qi += threads) {
            const AnalogyQuestion& q = data[qi];
            auto a = wv.id_of(q.a), as = wv.id_of(q.a_star), b = wv.id_of(q.b),
                 bs = wv.id_of(q.b_star);
            if (!a || !as || !b || !bs) {
                ++unanswerable[tid];
                continue;
            }
            ++answerable[tid];
            std::vector<double> query(dim);
            const double* va = norm.row_ptr(*a);
            const double* vas = norm.row_ptr(*as);
            const double* vb = norm.row_ptr(*b);
            for (std::size_t j = 0; j < dim; ++j) query[j] = vb[j] - va[j] + vas[j];

            double best = -std::numeric_limits<double>::infinity();
            WordId best_id = 0;
            for (WordId cand = 0; cand < n_words; ++cand) {
                if (cand == *a || cand == *as || cand == *b) continue;
                double score = dot(norm.row(cand), std::span<const double>(query));
                if (score > best) {
                    best = score;
                    best_id = cand;
                }
            }
            outcomes[tid].push_back({qi, best_id == *bs});
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
        for (auto& th : pool) th.join();
    }

    AnalogyResult r;
    std::uint64_t correct = 0;
    for (unsigned t = 0; t < threads; ++t) {
        r.answerable += answerable[t];
        r.unanswerable += unanswerable[t];
        for (const Outcome& o : outcomes[t]) {
            CategoryStats& cs = r.per_category[data[o.question].category];
            ++cs.answered;
            if (o.correct) {
                ++cs.correct;
                ++correct;
            }
        }
    }
    if (r.answerable == 0) throw Error(ErrorKind::Domain, "no analogy question is answerable");
    r.accuracy = static_cast<double>(correct) / static_cast<double>(r.answerable);
    return r;
}

SimilarityResult eval_sts(const WordVectors& wv, std::span<const SentencePair> data) {
    SimilarityResult r;
    std::vector<double> model, gold;
    std::vector<double> v1, v2;
    auto bag = [&](const std::vector<std::string>& sent, std::vector<double>& out) {
        out.assign(wv.dim(), 0.0);
        std::size_t covered = 0;
        for (const std::string& w : sent) {
            if (auto id = wv.id_of(w)) {
                auto row = wv.W.row(*id);
                for (std::size_t j = 0; j < row.size(); ++j) out[j] += row[j];
                ++covered;
            }
        }
        if (covered > 0)
            for (double& x : out) x /= static_cast<double>(covered);
        return covered;
    };
    for (const auto& p : data) {
        if (bag(p.s1, v1) == 0 || bag(p.s2, v2) == 0) {
            ++r.excluded;
            continue;
        }
        model.push_back(cosine(v1, v2));
        gold.push_back(p.gold);
    }
    r.covered = model.size();
    if (r.covered == 0) throw Error(ErrorKind::Domain, "no sentence pair is scorable");
    r.coverage = static_cast<double>(r.covered) / static_cast<double>(data.size());
    r.score = pearson(model, gold);
    return r;
}

Histogram histogram(std::span<const double> values, const HistogramSpec& spec) {
    if (!(spec.bucket_width > 0.0)) throw Error(ErrorKind::Usage, "bucket width must be > 0");
    if (values.empty()) throw Error(ErrorKind::Domain, "cannot build a histogram of nothing");
    if (!(spec.max >= spec.min)) throw Error(ErrorKind::Usage, "histogram range is empty");

    Histogram h;
    h.min = spec.min;
    h.bucket_width = spec.bucket_width;
    std::size_t buckets =
        std::max<std::size_t>(1, static_cast<std::size_t>(
                                     std::ceil((spec.max - spec.min) / spec.bucket_width)));
    h.counts.assign(buckets, 0);
    for (double v : values) {
        if (v < spec.min) {
            ++h.clamped_low;
            ++h.counts.front();
            continue;
        }
        if (v > spec.max) {
            ++h.clamped_high;
            ++h.counts.back();
            continue;
        }
        std::size_t i = static_cast<std::size_t>((v - spec.min) / spec.bucket_width);
        if (i >= buckets) i = buckets - 1;  // last bucket is closed
        ++h.counts[i];
    }
    return h;
}

SpectrumIntervals spectrum_intervals(std::span<const double> values, double z) {
    SpectrumIntervals s;
    for (double v : values) {
        if (v == z) ++s.at_floor;
        if (v > z && v <= 0.0) ++s.negative;
        if (v >= -2.0 && v <= 0.0) ++s.minus2_to_zero;
        if (v > 0.0) ++s.positive;
    }
    return s;
}

namespace {

namespace fs = std::filesystem;

[[noreturn]] void data_error(const fs::path& path, std::size_t line, const std::string& what) {
    std::ostringstream os;
    os << path.string() << ":" << line << ": " << what;
    throw Error(ErrorKind::Parse, os.str());
}

std::ifstream open_data(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open for reading: " + path.string());
    return in;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t tab = line.find('\t', pos);
        if (tab == std::string::npos) {
            out.push_back(line.substr(pos));
            return out;
        }
        out.push_back(line.substr(pos, tab - pos));
        pos = tab + 1;
    }
}

bool parse_double(const std::string& s, double* out) {
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (errno != 0 || end != s.c_str() + s.size() || s.empty()) return false;
    *out = v;
    return true;
}

std::string lower_ascii(std::string s) {
    for (char& c : s)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return s;
}

}  // namespace

std::vector<WordPairScore> load_word_pairs(const fs::path& path) {
    std::ifstream in = open_data(path);
    std::vector<WordPairScore> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = split_tabs(line);
        if (fields.size() < 3) data_error(path, lineno, "expected 'word1<TAB>word2<TAB>score'");
        double gold = 0.0;
        if (!parse_double(fields[2], &gold)) {
            if (lineno == 1) continue;  // header row
            data_error(path, lineno, "bad gold score '" + fields[2] + "'");
        }
        out.push_back({lower_ascii(fields[0]), lower_ascii(fields[1]), gold});
    }
    if (out.empty()) data_error(path, lineno, "no word pairs found");
    return out;
}

std::vector<AnalogyQuestion> load_analogies(const fs::path& path) {
    std::ifstream in = open_data(path);
    std::vector<AnalogyQuestion> out;
    std::string line, category = "default";
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == ':') {
            category = line.substr(line.find_first_not_of(" \t", 1) == std::string::npos
                                       ? 1
                                       : line.find_first_not_of(" \t", 1));
            continue;
        }
        std::istringstream ls(line);
        AnalogyQuestion q;
        q.category = category;
        if (!(ls >> q.a >> q.a_star >> q.b >> q.b_star) || !(ls >> std::ws).eof())
            data_error(path, lineno, "expected 'a a* b b*'");
        q.a = lower_ascii(q.a);
        q.a_star = lower_ascii(q.a_star);
        q.b = lower_ascii(q.b);
        q.b_star = lower_ascii(q.b_star);
        out.push_back(std::move(q));
    }
    if (out.empty()) data_error(path, lineno, "no analogy questions found");
    return out;
}

std::vector<SentencePair> load_sts(const fs::path& path, const StsColumns& cols) {
    std::ifstream in = open_data(path);
    std::vector<SentencePair> out;
    std::string line;
    std::size_t lineno = 0;
    const std::size_t needed = std::max({cols.gold, cols.s1, cols.s2}) + 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = split_tabs(line);
        if (fields.size() < needed) data_error(path, lineno, "too few tab-separated columns");
        SentencePair p;
        if (!parse_double(fields[cols.gold], &p.gold)) {
            if (lineno == 1) continue;  // header row
            data_error(path, lineno, "bad gold score '" + fields[cols.gold] + "'");
        }
        p.s1 = tokenize(fields[cols.s1]);
        p.s2 = tokenize(fields[cols.s2]);
        if (p.s1.empty() || p.s2.empty()) data_error(path, lineno, "empty sentence");
        out.push_back(std::move(p));
    }
    if (out.empty()) data_error(path, lineno, "no sentence pairs found");
    return out;
}

}  // namespace pmivec
