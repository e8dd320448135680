#include "pmivec/cooccurrence.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <thread>

namespace pmivec {

double CoocMatrix::cell(WordId w, CtxId c) const {
    if (w >= vocab_size || c >= ctx_size) throw Error(ErrorKind::Domain, "cell index out of range");
    const CtxId* begin = cell_ctx.data() + row_ptr[w];
    const CtxId* end = cell_ctx.data() + row_ptr[w + 1];
    const CtxId* it = std::lower_bound(begin, end, c);
    if (it == end || *it != c) return 0.0;
    return cell_count[static_cast<std::size_t>(it - cell_ctx.data())];
}

CtxId CoocMatrix::context_id(WordId word, int offset) const {
    if (!positional) return word;
    if (offset == 0 || offset < -static_cast<int>(window) || offset > static_cast<int>(window))
        throw Error(ErrorKind::Domain, "context offset out of window");
    std::uint32_t idx = offset < 0 ? static_cast<std::uint32_t>(offset + static_cast<int>(window))
                                   : window + static_cast<std::uint32_t>(offset) - 1;
    return word * 2 * window + idx;
}

PositionalContext CoocMatrix::context_of(CtxId c) const {
    if (!positional) return {c, 0};
    std::uint32_t idx = c % (2 * window);
    int offset = idx < window ? static_cast<int>(idx) - static_cast<int>(window)
                              : static_cast<int>(idx - window) + 1;
    return {c / (2 * window), offset};
}

CoocMatrix CoocMatrix::from_records(std::uint32_t vocab_size, std::uint32_t window,
                                    bool positional,
                                    std::span<const std::pair<std::uint64_t, double>> cells) {
    CoocMatrix m;
    m.vocab_size = vocab_size;
    m.window = window;
    m.positional = positional;
    m.ctx_size = context_space(vocab_size, window, positional);
    m.row_ptr.assign(vocab_size + 1, 0);
    m.cell_ctx.reserve(cells.size());
    m.cell_count.reserve(cells.size());
    m.row_marginals.assign(vocab_size, 0.0);
    m.col_marginals.assign(m.ctx_size, 0.0);

    std::uint64_t prev_key = 0;
    bool first = true;
    for (const auto& [key, count] : cells) {
        WordId w = static_cast<WordId>(key >> 32);
        CtxId c = static_cast<CtxId>(key & 0xFFFFFFFFu);
        if (!first && key <= prev_key)
            throw Error(ErrorKind::Parse, "cooccurrence records not strictly sorted");
        if (w >= vocab_size || c >= m.ctx_size)
            throw Error(ErrorKind::Parse, "cooccurrence record id out of range");
        if (!(count > 0.0) || !std::isfinite(count))
            throw Error(ErrorKind::Parse, "cooccurrence count must be finite and positive");
        prev_key = key;
        first = false;
        ++m.row_ptr[w + 1];
        m.cell_ctx.push_back(c);
        m.cell_count.push_back(count);
        m.row_marginals[w] += count;
        m.col_marginals[c] += count;
        m.grand_total += count;
    }
    for (std::uint32_t w = 0; w < vocab_size; ++w) m.row_ptr[w + 1] += m.row_ptr[w];
    return m;
}

std::uint64_t window_pair_count(std::uint64_t n, std::uint32_t window) {
    if (n == 0) return 0;
    std::uint64_t w = window;
    if (n > 2 * w) {
        // interior tokens have 2w neighbors; each boundary loses w(w+1)/2 pairs
        return 2 * w * n - w * (w + 1);
    }
    std::uint64_t total = 0;
    for (std::uint64_t p = 0; p < n; ++p)
        total += std::min<std::uint64_t>(w, p) + std::min<std::uint64_t>(w, n - 1 - p);
    return total;
}

namespace {

using KeyRun = std::vector<std::pair<std::uint64_t, double>>;

// Sorts raw pair keys and collapses duplicates into (key, count) runs.
KeyRun aggregate(std::vector<std::uint64_t>& keys) {
    std::sort(keys.begin(), keys.end());
    KeyRun run;
    run.reserve(keys.size() / 2 + 1);
    for (std::size_t i = 0; i < keys.size();) {
        std::size_t j = i;
        while (j < keys.size() && keys[j] == keys[i]) ++j;
        run.emplace_back(keys[i], static_cast<double>(j - i));
        i = j;
    }
    keys.clear();
    keys.shrink_to_fit();
    return run;
}

}  // namespace

CoocMatrix count_cooccurrences(std::span<const WordId> tokens, const Vocabulary& vocab,
                               std::uint32_t window, bool positional, const SubsampleParams& sub,
                               unsigned threads) {
    if (window < 1) throw Error(ErrorKind::Usage, "window must be >= 1");
    const std::uint32_t vocab_size = static_cast<std::uint32_t>(vocab.size());
    for (WordId w : tokens) {
        if (w >= vocab_size) throw Error(ErrorKind::Domain, "token id out of vocabulary range");
    }

    SubsampleParams pass = sub;
    pass.seed = derive_seed(sub.seed, SeedStream::CountingPass);
    std::vector<WordId> stream = subsample(tokens, vocab, pass);

    const std::uint64_t n = stream.size();
    const int w = static_cast<int>(window);
    if (threads < 1) threads = 1;
    std::uint64_t per = threads > 1 ? (n + threads - 1) / threads : n;

    std::vector<KeyRun> runs(threads);
    auto work = [&](unsigned tid) {
        std::uint64_t lo = tid * per;
        std::uint64_t hi = std::min<std::uint64_t>(n, lo + per);
        if (lo >= hi) return;
        std::vector<std::uint64_t> keys;
        keys.reserve((hi - lo) * 2 * window);
        for (std::uint64_t p = lo; p < hi; ++p) {
            std::uint64_t center = static_cast<std::uint64_t>(stream[p]) << 32;
            for (int i = -w; i <= w; ++i) {
                if (i == 0) continue;
                std::int64_t q = static_cast<std::int64_t>(p) + i;
                if (q < 0 || q >= static_cast<std::int64_t>(n)) continue;
                CtxId c = positional
                              ? stream[q] * 2 * window +
                                    (i < 0 ? static_cast<std::uint32_t>(i + w)
                                           : window + static_cast<std::uint32_t>(i) - 1)
                              : stream[q];
                keys.push_back(center | c);
            }
        }
        runs[tid] = aggregate(keys);
    };

    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
        for (auto& th : pool) th.join();
    }

    // k-way merge of sorted runs, summing counts of equal keys
    KeyRun merged;
    {
        std::size_t total = 0;
        for (const auto& r : runs) total += r.size();
        merged.reserve(total);
        using Head = std::pair<std::uint64_t, unsigned>;  // (key, run index)
        std::vector<std::size_t> pos(runs.size(), 0);
        auto cmp = [](const Head& a, const Head& b) { return a.first > b.first; };
        std::priority_queue<Head, std::vector<Head>, decltype(cmp)> heap(cmp);
        for (unsigned t = 0; t < runs.size(); ++t)
            if (!runs[t].empty()) heap.push({runs[t][0].first, t});
        while (!heap.empty()) {
            auto [key, t] = heap.top();
            heap.pop();
            double cnt = runs[t][pos[t]].second;
            if (!merged.empty() && merged.back().first == key) {
                merged.back().second += cnt;
            } else {
                merged.emplace_back(key, cnt);
            }
            if (++pos[t] < runs[t].size()) heap.push({runs[t][pos[t]].first, t});
        }
    }

    return CoocMatrix::from_records(vocab_size, window, positional, merged);
}

SmoothedContextDistribution smoothed_context_distribution(const CoocMatrix& m, double alpha) {
    if (!(alpha > 0.0) || alpha > 1.0)
        throw Error(ErrorKind::Usage, "smoothing exponent alpha must be in (0, 1]");
    if (!(m.grand_total > 0.0))
        throw Error(ErrorKind::Domain, "context distribution undefined: all marginals are zero");
    SmoothedContextDistribution d;
    d.alpha = alpha;
    d.probabilities.resize(m.ctx_size);
    double norm = 0.0;
    for (std::uint32_t c = 0; c < m.ctx_size; ++c) {
        double p = m.col_marginals[c] > 0.0 ? std::pow(m.col_marginals[c], alpha) : 0.0;
        d.probabilities[c] = p;
        norm += p;
    }
    for (double& p : d.probabilities) p /= norm;
    return d;
}

}  // namespace pmivec
