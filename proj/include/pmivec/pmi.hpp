#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "pmivec/common.hpp"
#include "pmivec/cooccurrence.hpp"

namespace pmivec {

enum class PmiKind { Ppmi, Cpmi, Npmi, Nnegpmi, Lpmi };

enum class CellFilter { All, PositiveOnly, NonpositiveOnly };

struct PmiVariantSpec {
    PmiKind kind = PmiKind::Ppmi;
    double z = 0.0;      // CPMI floor, must be <= 0
    double beta = 0.0;   // LPMI pseudocount, must be > 0
    double alpha = 0.75; // context distribution smoothing exponent
    CellFilter filter = CellFilter::All;

    void validate() const;
    std::string to_string() const;  // round-trips through parse()

    // Grammar: "ppmi" | "cpmi:Z" | "npmi" | "nnegpmi" | "lpmi:B",
    // with optional filter suffix "+pos" | "+neg".
    static PmiVariantSpec parse(std::string_view text, double alpha = 0.75);
};

// All -> always; PositiveOnly -> target > 0; NonpositiveOnly -> target <= 0.
inline bool should_train_cell(const PmiVariantSpec& spec, double target) {
    switch (spec.filter) {
        case CellFilter::All: return true;
        case CellFilter::PositiveOnly: return target > 0.0;
        case CellFilter::NonpositiveOnly: return target <= 0.0;
    }
    return true;
}

// Lazy per-cell PMI-variant computation over an immutable CoocMatrix.
// Normalizers are cached at construction; each call is O(log row_nnz).
class PmiTransformer {
public:
    PmiTransformer(const CoocMatrix& m, const SmoothedContextDistribution& dist,
                   const PmiVariantSpec& spec);

    // log[(M_wc/M_**) / ((M_w*/M_**) * P_alpha(c))]; -inf when M_wc = 0.
    // With alpha = 1 this is exactly log(M_wc * M_** / (M_w* * M_*c)).
    double pmi(WordId w, CtxId c) const { return pmi_of_count(w, c, m_->cell(w, c)); }

    // Finite target value of the configured variant.
    double transform(WordId w, CtxId c) const { return transform_count(w, c, m_->cell(w, c)); }

    const PmiVariantSpec& spec() const { return spec_; }
    const CoocMatrix& matrix() const { return *m_; }

    // Internal entry points that skip the cell lookup (training hot path).
    double pmi_of_count(WordId w, CtxId c, double cnt) const;
    double transform_count(WordId w, CtxId c, double cnt) const;

private:
    void require_defined(WordId w, CtxId c) const;

    const CoocMatrix* m_;
    PmiVariantSpec spec_;
    double log_total_ = 0.0;            // log M_**
    std::vector<double> log_row_;       // log M_w*
    std::vector<double> log_ctx_prob_;  // log P_alpha(c)
    // Laplace-adjusted normalizers (LPMI only)
    std::vector<double> lap_log_row_;
    std::vector<double> lap_log_ctx_prob_;
};

}  // namespace pmivec
