#include "pmivec/factorizer.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <ostream>
#include <sstream>
#include <thread>

namespace pmivec {

void TrainConfig::validate() const {
    if (window < 1) throw Error(ErrorKind::Usage, "window must be >= 1");
    if (dim < 1) throw Error(ErrorKind::Usage, "dim must be >= 1");
    if (!(lr > 0.0)) throw Error(ErrorKind::Usage, "learning rate must be > 0");
    if (epochs < 1) throw Error(ErrorKind::Usage, "epochs must be >= 1");
    if (subsample_enabled && !(subsample_t > 0.0))
        throw Error(ErrorKind::Usage, "subsample threshold must be > 0");
    if (!(neg_power > 0.0)) throw Error(ErrorKind::Usage, "negative distribution power must be > 0");
    if (threads < 1) throw Error(ErrorKind::Usage, "threads must be >= 1");
    variant.validate();
}

Embeddings init_embeddings(std::uint32_t vocab_size, std::uint32_t ctx_size, std::uint32_t dim,
                           std::uint64_t seed) {
    if (vocab_size < 1 || ctx_size < 1 || dim < 1)
        throw Error(ErrorKind::Usage, "embedding sizes must be >= 1");
    Embeddings emb;
    emb.dim = dim;
    emb.W = Matrix(vocab_size, dim);
    emb.C = Matrix(ctx_size, dim);
    Rng rng(derive_seed(seed, SeedStream::Init));
    const double inv_dim = 1.0 / static_cast<double>(dim);
    for (double& x : emb.W.data) x = (rng.next01() - 0.5) * inv_dim;
    for (double& x : emb.C.data) x = (rng.next01() - 0.5) * inv_dim;
    return emb;
}

namespace {

// Simultaneous update: both gradients use pre-update row values.
inline double sgd_step_raw(double* wr, double* cr, std::size_t dim, double target, double lr,
                           double* residual_out) {
    double d = 0.0;
    for (std::size_t i = 0; i < dim; ++i) d += wr[i] * cr[i];
    const double e = d - target;
    *residual_out = e;
    const double g = lr * e;
    for (std::size_t i = 0; i < dim; ++i) {
        const double wi = wr[i];
        const double ci = cr[i];
        wr[i] = wi - g * ci;
        cr[i] = ci - g * wi;
    }
    return 0.5 * e * e;
}

double lr_at(double lr0, std::uint64_t step, std::uint64_t total) {
    double frac = total > 0 ? static_cast<double>(step) / static_cast<double>(total) : 1.0;
    if (frac > 1.0) frac = 1.0;
    return lr0 * (1.0 - (1.0 - 1e-4) * frac);
}

struct EpochPlan {
    std::uint64_t seed_sub;  // subsample decisions for this pass
    std::uint64_t seed_neg;  // negative draws for this pass
};

EpochPlan epoch_plan(const TrainConfig& cfg, std::uint32_t epoch) {
    return {derive_seed(cfg.seed, SeedStream::TrainingPass, epoch),
            derive_seed(cfg.seed, SeedStream::NegativeSampling, epoch)};
}

// Visits every scheduled pair for stream positions [lo, hi) in training order:
// window pairs of each center (offsets -w..-1, +1..+w), then its k negatives.
// fn(w, c, negative_sample) -> bool; returning false stops the scan.
template <class PairFn>
void visit_pairs(std::span<const WordId> stream, const CoocMatrix& m, const TrainConfig& cfg,
                 std::uint64_t seed_neg, const AliasSampler& neg, std::uint64_t lo,
                 std::uint64_t hi, PairFn&& fn) {
    const std::int64_t n = static_cast<std::int64_t>(stream.size());
    const int w = static_cast<int>(cfg.window);
    for (std::uint64_t p = lo; p < hi; ++p) {
        const WordId center = stream[p];
        for (int i = -w; i <= w; ++i) {
            if (i == 0) continue;
            const std::int64_t q = static_cast<std::int64_t>(p) + i;
            if (q < 0 || q >= n) continue;
            if (!fn(center, m.context_id(stream[q], i), false)) return;
        }
        if (cfg.negatives > 0) {
            Rng rng(mix64(seed_neg, p));
            for (std::uint32_t j = 0; j < cfg.negatives; ++j) {
                if (!fn(center, neg.sample(rng), true)) return;
            }
        }
    }
}

[[noreturn]] void throw_non_finite(std::uint64_t step, WordId w, CtxId c, double residual) {
    std::ostringstream os;
    os << "training aborted: non-finite residual " << residual << " at step " << step
       << " on pair (" << w << ", " << c << ")";
    throw Error(ErrorKind::Train, os.str());
}

}  // namespace

double sgd_step(Embeddings& emb, WordId w, CtxId c, double target, double lr) {
    if (!(lr > 0.0)) throw Error(ErrorKind::Usage, "learning rate must be > 0");
    if (!std::isfinite(target)) throw Error(ErrorKind::Train, "sgd_step target must be finite");
    if (w >= emb.W.rows || c >= emb.C.rows)
        throw Error(ErrorKind::Domain, "sgd_step row index out of range");
    double residual = 0.0;
    double loss = sgd_step_raw(emb.W.row_ptr(w), emb.C.row_ptr(c), emb.dim, target, lr, &residual);
    if (!std::isfinite(residual)) throw_non_finite(0, w, c, residual);
    return loss;
}

void write_report(const TrainReport& report, std::ostream& out) {
    for (std::size_t e = 0; e < report.epochs.size(); ++e) {
        const EpochStats& s = report.epochs[e];
        out << "epoch=" << (e + 1) << " mean_loss=" << s.mean_loss << " executed=" << s.executed
            << " skipped=" << s.skipped << " wall_s=" << s.wall_s << "\n";
    }
    out << "total scheduled=" << report.total_scheduled << " executed=" << report.total_executed
        << " skipped=" << report.total_skipped << " diverged=" << (report.diverged ? 1 : 0)
        << "\n";
}

Embeddings train(std::span<const WordId> corpus, const Vocabulary& vocab, const CoocMatrix& m,
                 const TrainConfig& cfg, TrainReport* report, const StepHook& hook) {
    cfg.validate();
    if (corpus.empty()) throw Error(ErrorKind::Domain, "cannot train on an empty corpus");
    if (m.vocab_size != vocab.size())
        throw Error(ErrorKind::Usage, "cooccurrence matrix does not match vocabulary size");
    if (m.window != cfg.window)
        throw Error(ErrorKind::Usage, "cooccurrence matrix window does not match train config");
    if (hook && cfg.threads != 1)
        throw Error(ErrorKind::Usage, "step instrumentation requires threads=1");

    SmoothedContextDistribution dist = smoothed_context_distribution(m, cfg.alpha);
    PmiVariantSpec spec = cfg.variant;
    spec.alpha = cfg.alpha;
    const PmiTransformer transform(m, dist, spec);
    const AliasSampler neg(m.col_marginals, cfg.neg_power);

    Embeddings emb = init_embeddings(m.vocab_size, m.ctx_size, cfg.dim, cfg.seed);

    // exact step schedule, needed for the linear lr decay
    std::uint64_t total_steps = 0;
    std::vector<std::uint64_t> epoch_tokens(cfg.epochs);
    for (std::uint32_t e = 0; e < cfg.epochs; ++e) {
        SubsampleParams p{cfg.subsample_t, cfg.subsample_enabled, epoch_plan(cfg, e).seed_sub};
        epoch_tokens[e] = subsample_count(corpus, vocab, p);
        total_steps += window_pair_count(epoch_tokens[e], cfg.window) +
                       static_cast<std::uint64_t>(cfg.negatives) * epoch_tokens[e];
    }

    TrainReport local_report;
    TrainReport& rep = report ? *report : local_report;
    rep = TrainReport{};
    rep.total_scheduled = total_steps;

    std::atomic<std::uint64_t> steps_done{0};

    for (std::uint32_t e = 0; e < cfg.epochs; ++e) {
        const EpochPlan plan = epoch_plan(cfg, e);
        SubsampleParams p{cfg.subsample_t, cfg.subsample_enabled, plan.seed_sub};
        const std::vector<WordId> stream = subsample(corpus, vocab, p);
        const std::uint64_t n = stream.size();

        auto t0 = std::chrono::steady_clock::now();
        const unsigned threads = cfg.threads;
        std::vector<double> loss_sum(threads, 0.0);
        std::vector<std::uint64_t> executed(threads, 0), skipped(threads, 0);
        std::vector<std::exception_ptr> errors(threads);

        auto work = [&](unsigned tid) {
            try {
                const std::uint64_t per = (n + threads - 1) / threads;
                const std::uint64_t lo = tid * per;
                const std::uint64_t hi = std::min<std::uint64_t>(n, lo + per);
                double* W = emb.W.data.data();
                double* C = emb.C.data.data();
                const std::size_t dim = cfg.dim;
                visit_pairs(stream, m, cfg, plan.seed_neg, neg, lo, hi,
                            [&](WordId wid, CtxId cid, bool negative) {
                                const double target = transform.transform(wid, cid);
                                const std::uint64_t step =
                                    steps_done.fetch_add(1, std::memory_order_relaxed);
                                StepInfo info{wid, cid, target, negative, false, 0.0};
                                if (should_train_cell(spec, target)) {
                                    const double lr = lr_at(cfg.lr, step, total_steps);
                                    double residual = 0.0;
                                    info.loss = sgd_step_raw(W + wid * dim, C + cid * dim, dim,
                                                             target, lr, &residual);
                                    if (!std::isfinite(residual))
                                        throw_non_finite(step, wid, cid, residual);
                                    info.executed = true;
                                    loss_sum[tid] += info.loss;
                                    ++executed[tid];
                                } else {
                                    ++skipped[tid];
                                }
                                if (hook) hook(info);
                                return true;
                            });
            } catch (...) {
                errors[tid] = std::current_exception();
            }
        };

        if (threads == 1) {
            work(0);
        } else {
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
            for (auto& th : pool) th.join();
        }
        for (auto& err : errors)
            if (err) std::rethrow_exception(err);

        EpochStats stats;
        for (unsigned t = 0; t < threads; ++t) {
            stats.executed += executed[t];
            stats.skipped += skipped[t];
            stats.mean_loss += loss_sum[t];
        }
        stats.mean_loss = stats.executed > 0 ? stats.mean_loss / static_cast<double>(stats.executed) : 0.0;
        stats.wall_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rep.epochs.push_back(stats);
        rep.total_executed += stats.executed;
        rep.total_skipped += stats.skipped;

        if (stats.executed > 0 && stats.mean_loss > 1e6) {
            rep.diverged = true;
            std::ostringstream os;
            os << "training diverged: mean loss " << stats.mean_loss << " in epoch " << (e + 1);
            throw Error(ErrorKind::Train, os.str());
        }
    }

    for (double x : emb.W.data)
        if (!std::isfinite(x)) throw Error(ErrorKind::Train, "non-finite word embedding entry");
    for (double x : emb.C.data)
        if (!std::isfinite(x)) throw Error(ErrorKind::Train, "non-finite context embedding entry");
    return emb;
}

SpectrumSample sample_spectrum(std::span<const WordId> corpus, const Vocabulary& vocab,
                               const CoocMatrix& m, const TrainConfig& cfg, std::uint64_t n,
                               double z) {
    if (n < 1) throw Error(ErrorKind::Usage, "spectrum sample size must be >= 1");
    if (corpus.empty()) throw Error(ErrorKind::Domain, "cannot sample from an empty corpus");
    if (m.vocab_size != vocab.size())
        throw Error(ErrorKind::Usage, "cooccurrence matrix does not match vocabulary size");

    TrainConfig c = cfg;
    c.validate();
    SmoothedContextDistribution dist = smoothed_context_distribution(m, c.alpha);
    PmiVariantSpec spec;
    spec.kind = PmiKind::Cpmi;
    spec.z = z;
    spec.alpha = c.alpha;
    const PmiTransformer transform(m, dist, spec);
    const AliasSampler neg(m.col_marginals, c.neg_power);

    SpectrumSample out;
    out.pairs.reserve(n);
    for (std::uint32_t epoch = 0; out.pairs.size() < n; ++epoch) {
        const EpochPlan plan = epoch_plan(c, epoch);
        SubsampleParams p{c.subsample_t, c.subsample_enabled, plan.seed_sub};
        const std::vector<WordId> stream = subsample(corpus, vocab, p);
        const std::size_t before = out.pairs.size();
        visit_pairs(stream, m, c, plan.seed_neg, neg, 0, stream.size(),
                    [&](WordId wid, CtxId cid, bool negative) {
                        out.pairs.push_back({wid, cid, negative, transform.transform(wid, cid)});
                        return out.pairs.size() < n;
                    });
        if (epoch > 0) out.wrapped = true;
        if (out.pairs.size() == before)
            throw Error(ErrorKind::Domain, "corpus yields no pairs to sample");
    }
    return out;
}

AliasSampler::AliasSampler(std::span<const double> weights, double power) {
    const std::size_t n = weights.size();
    if (n == 0) throw Error(ErrorKind::Domain, "alias sampler needs at least one weight");
    dist_.resize(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (weights[i] < 0.0) throw Error(ErrorKind::Domain, "alias weights must be non-negative");
        dist_[i] = weights[i] > 0.0 ? std::pow(weights[i], power) : 0.0;
        total += dist_[i];
    }
    if (!(total > 0.0)) throw Error(ErrorKind::Domain, "alias sampler needs a positive weight");
    for (double& p : dist_) p /= total;

    prob_.assign(n, 0.0);
    alias_.assign(n, 0);
    std::vector<std::uint32_t> small, large;
    std::vector<double> scaled(n);
    for (std::size_t i = 0; i < n; ++i) {
        scaled[i] = dist_[i] * static_cast<double>(n);
        (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
        std::uint32_t s = small.back();
        small.pop_back();
        std::uint32_t l = large.back();
        large.pop_back();
        prob_[s] = scaled[s];
        alias_[s] = l;
        scaled[l] = (scaled[l] + scaled[s]) - 1.0;
        (scaled[l] < 1.0 ? small : large).push_back(l);
    }
    for (std::uint32_t l : large) prob_[l] = 1.0;
    for (std::uint32_t s : small) prob_[s] = 1.0;  // numerical leftovers
}

std::uint32_t AliasSampler::sample(Rng& rng) const {
    const std::size_t n = prob_.size();
    std::uint32_t slot = static_cast<std::uint32_t>(rng.next_below(n));
    return rng.next01() < prob_[slot] ? slot : alias_[slot];
}

}  // namespace pmivec
