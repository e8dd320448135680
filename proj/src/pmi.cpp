#include "pmivec/pmi.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace pmivec {

void PmiVariantSpec::validate() const {
    if (kind == PmiKind::Cpmi && z > 0.0)
        throw Error(ErrorKind::Usage, "cpmi floor z must be <= 0");
    if (kind == PmiKind::Lpmi && !(beta > 0.0))
        throw Error(ErrorKind::Usage, "lpmi pseudocount must be > 0");
    if (!(alpha > 0.0) || alpha > 1.0)
        throw Error(ErrorKind::Usage, "smoothing exponent alpha must be in (0, 1]");
}

std::string PmiVariantSpec::to_string() const {
    std::ostringstream os;
    switch (kind) {
        case PmiKind::Ppmi: os << "ppmi"; break;
        case PmiKind::Cpmi: os << "cpmi:" << z; break;
        case PmiKind::Npmi: os << "npmi"; break;
        case PmiKind::Nnegpmi: os << "nnegpmi"; break;
        case PmiKind::Lpmi: os << "lpmi:" << beta; break;
    }
    if (filter == CellFilter::PositiveOnly) os << "+pos";
    if (filter == CellFilter::NonpositiveOnly) os << "+neg";
    return os.str();
}

namespace {

double parse_number(std::string_view s, std::string_view what) {
    double value = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        std::ostringstream os;
        os << "invalid " << what << " parameter '" << s << "'";
        throw Error(ErrorKind::Usage, os.str());
    }
    return value;
}

}  // namespace

PmiVariantSpec PmiVariantSpec::parse(std::string_view text, double alpha) {
    PmiVariantSpec spec;
    spec.alpha = alpha;

    if (text.ends_with("+pos")) {
        spec.filter = CellFilter::PositiveOnly;
        text.remove_suffix(4);
    } else if (text.ends_with("+neg")) {
        spec.filter = CellFilter::NonpositiveOnly;
        text.remove_suffix(4);
    }

    std::string_view name = text;
    std::string_view param;
    if (auto colon = text.find(':'); colon != std::string_view::npos) {
        name = text.substr(0, colon);
        param = text.substr(colon + 1);
    }

    if (name == "ppmi") {
        spec.kind = PmiKind::Ppmi;
    } else if (name == "cpmi") {
        spec.kind = PmiKind::Cpmi;
        if (param.empty()) throw Error(ErrorKind::Usage, "cpmi requires a floor, e.g. cpmi:-2");
        spec.z = parse_number(param, "cpmi floor");
    } else if (name == "npmi") {
        spec.kind = PmiKind::Npmi;
    } else if (name == "nnegpmi") {
        spec.kind = PmiKind::Nnegpmi;
    } else if (name == "lpmi") {
        spec.kind = PmiKind::Lpmi;
        if (param.empty()) throw Error(ErrorKind::Usage, "lpmi requires a pseudocount, e.g. lpmi:0.5");
        spec.beta = parse_number(param, "lpmi pseudocount");
    } else {
        std::ostringstream os;
        os << "unknown pmi variant '" << std::string(text) << "'";
        throw Error(ErrorKind::Usage, os.str());
    }
    if ((spec.kind == PmiKind::Ppmi || spec.kind == PmiKind::Npmi ||
         spec.kind == PmiKind::Nnegpmi) &&
        !param.empty())
        throw Error(ErrorKind::Usage, "variant takes no parameter");
    spec.validate();
    return spec;
}

PmiTransformer::PmiTransformer(const CoocMatrix& m, const SmoothedContextDistribution& dist,
                               const PmiVariantSpec& spec)
    : m_(&m), spec_(spec) {
    spec_.validate();
    if (dist.probabilities.size() != m.ctx_size)
        throw Error(ErrorKind::Usage, "context distribution does not match matrix");
    if (!(m.grand_total > 0.0)) throw Error(ErrorKind::Domain, "empty cooccurrence matrix");

    log_total_ = std::log(m.grand_total);
    log_row_.resize(m.vocab_size);
    for (std::uint32_t w = 0; w < m.vocab_size; ++w)
        log_row_[w] = m.row_marginals[w] > 0.0 ? std::log(m.row_marginals[w]) : kNegInfinity;
    log_ctx_prob_.resize(m.ctx_size);
    for (std::uint32_t c = 0; c < m.ctx_size; ++c)
        log_ctx_prob_[c] =
            dist.probabilities[c] > 0.0 ? std::log(dist.probabilities[c]) : kNegInfinity;

    if (spec_.kind == PmiKind::Lpmi) {
        const double bC = spec_.beta * static_cast<double>(m.ctx_size);
        const double bV = spec_.beta * static_cast<double>(m.vocab_size);
        lap_log_row_.resize(m.vocab_size);
        for (std::uint32_t w = 0; w < m.vocab_size; ++w)
            lap_log_row_[w] = std::log(m.row_marginals[w] + bC);
        lap_log_ctx_prob_.resize(m.ctx_size);
        double norm = 0.0;
        for (std::uint32_t c = 0; c < m.ctx_size; ++c) {
            double p = std::pow(m.col_marginals[c] + bV, spec_.alpha);
            lap_log_ctx_prob_[c] = p;
            norm += p;
        }
        double log_norm = std::log(norm);
        for (std::uint32_t c = 0; c < m.ctx_size; ++c)
            lap_log_ctx_prob_[c] = spec_.alpha * std::log(m.col_marginals[c] + bV) - log_norm;
    }
}

void PmiTransformer::require_defined(WordId w, CtxId c) const {
    if (!(m_->row_marginals[w] > 0.0)) {
        std::ostringstream os;
        os << "pmi undefined: word " << w << " never occurs";
        throw Error(ErrorKind::Domain, os.str());
    }
    if (!(m_->col_marginals[c] > 0.0)) {
        std::ostringstream os;
        os << "pmi undefined: context " << c << " never occurs";
        throw Error(ErrorKind::Domain, os.str());
    }
}

double PmiTransformer::pmi_of_count(WordId w, CtxId c, double cnt) const {
    require_defined(w, c);
    if (cnt == 0.0) return kNegInfinity;
    // M_** cancels once the smoothed context probability is normalized
    return std::log(cnt) - log_row_[w] - log_ctx_prob_[c];
}

double PmiTransformer::transform_count(WordId w, CtxId c, double cnt) const {
    switch (spec_.kind) {
        case PmiKind::Ppmi: {
            if (cnt == 0.0) {
                require_defined(w, c);
                return 0.0;
            }
            double v = pmi_of_count(w, c, cnt);
            return v > 0.0 ? v : 0.0;
        }
        case PmiKind::Cpmi: {
            if (cnt == 0.0) {
                require_defined(w, c);
                return spec_.z;
            }
            double v = pmi_of_count(w, c, cnt);
            return v > spec_.z ? v : spec_.z;
        }
        case PmiKind::Npmi: {
            if (cnt == 0.0) {
                require_defined(w, c);
                return -1.0;
            }
            double v = pmi_of_count(w, c, cnt);
            double denom = log_total_ - std::log(cnt);  // -log(M_wc / M_**)
            if (denom == 0.0) return 1.0;               // always cooccur: limit value
            return v / denom;
        }
        case PmiKind::Nnegpmi: {
            if (cnt == 0.0) {
                require_defined(w, c);
                return -1.0;
            }
            double v = pmi_of_count(w, c, cnt);
            if (v >= 0.0) return v;
            double denom = log_total_ - std::log(cnt);
            if (denom == 0.0) return 1.0;
            return v / denom;
        }
        case PmiKind::Lpmi: {
            require_defined(w, c);
            return std::log(cnt + spec_.beta) - lap_log_row_[w] - lap_log_ctx_prob_[c];
        }
    }
    throw Error(ErrorKind::Usage, "unreachable pmi kind");
}

}  // namespace pmivec
