#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "pmivec/common.hpp"
#include "pmivec/cooccurrence.hpp"
#include "pmivec/corpus.hpp"
#include "pmivec/pmi.hpp"

namespace pmivec {

struct Embeddings {
    Matrix W;  // vocab_size x dim
    Matrix C;  // ctx_size x dim
    std::uint32_t dim = 0;
};

// Entries i.i.d. uniform on [-0.5/dim, +0.5/dim], deterministic given seed.
Embeddings init_embeddings(std::uint32_t vocab_size, std::uint32_t ctx_size, std::uint32_t dim,
                           std::uint64_t seed);

struct TrainConfig {
    std::uint32_t window = 2;
    std::uint32_t dim = 300;
    std::uint32_t negatives = 5;
    double lr = 0.025;
    std::uint32_t epochs = 5;
    double subsample_t = 1e-5;
    bool subsample_enabled = true;
    double alpha = 0.75;      // context distribution smoothing
    double neg_power = 0.75;  // negative distribution exponent
    PmiVariantSpec variant;
    std::uint64_t seed = 1;
    unsigned threads = 1;

    void validate() const;
};

struct EpochStats {
    double mean_loss = 0.0;
    std::uint64_t executed = 0;
    std::uint64_t skipped = 0;
    double wall_s = 0.0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    std::uint64_t total_scheduled = 0;
    std::uint64_t total_executed = 0;
    std::uint64_t total_skipped = 0;
    bool diverged = false;
};

void write_report(const TrainReport& report, std::ostream& out);

// Per-step instrumentation; implies single-threaded execution.
struct StepInfo {
    WordId w;
    CtxId c;
    double target;
    bool negative_sample;
    bool executed;
    double loss;  // valid when executed
};
using StepHook = std::function<void(const StepInfo&)>;

// One SGD step on L_wc = 1/2 (W_w . C_c - target)^2 with simultaneous row
// update; returns the pre-update loss.
double sgd_step(Embeddings& emb, WordId w, CtxId c, double target, double lr);

// Window sampling + negative sampling SGD over cfg.epochs passes of the
// subsampled corpus, honoring the variant's cell filter. Learning rate decays
// linearly from cfg.lr to cfg.lr * 1e-4 over the total scheduled step count.
// threads > 1 runs lock-free parallel workers (statistically reproducible
// only); threads == 1 is bit-deterministic given the seed.
Embeddings train(std::span<const WordId> corpus, const Vocabulary& vocab, const CoocMatrix& m,
                 const TrainConfig& cfg, TrainReport* report = nullptr,
                 const StepHook& hook = {});

struct SampledPair {
    WordId w;
    CtxId c;
    bool negative_sample;
    double target;  // CPMI_z of the pair
};

struct SpectrumSample {
    std::vector<SampledPair> pairs;
    bool wrapped = false;  // corpus was too small for n pairs in one epoch
};

// Draws pairs exactly as train() would visit them (filters ignored) and
// evaluates CPMI_z on each; stops after n pairs.
SpectrumSample sample_spectrum(std::span<const WordId> corpus, const Vocabulary& vocab,
                               const CoocMatrix& m, const TrainConfig& cfg, std::uint64_t n,
                               double z);

// Draws indices with probability proportional to weight^power (Vose alias).
class AliasSampler {
public:
    AliasSampler(std::span<const double> weights, double power);
    std::uint32_t sample(Rng& rng) const;
    const std::vector<double>& distribution() const { return dist_; }

private:
    std::vector<double> prob_;
    std::vector<std::uint32_t> alias_;
    std::vector<double> dist_;
};

}  // namespace pmivec
