#include "hilpareto/gp/likelihood.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "hilpareto/common/normal.hpp"

namespace hilpareto::gp {

std::string_view to_string(OrdinalLabel label) {
    switch (label) {
        case OrdinalLabel::easy: return "easy";
        case OrdinalLabel::moderate: return "moderate";
        case OrdinalLabel::hard: return "hard";
    }
    throw std::invalid_argument("invalid ordinal label");
}

std::optional<OrdinalLabel> parse_label(std::string_view s) {
    if (s == "easy") return OrdinalLabel::easy;
    if (s == "moderate") return OrdinalLabel::moderate;
    if (s == "hard") return OrdinalLabel::hard;
    return std::nullopt;
}

std::string_view to_string(Preference p) {
    return p == Preference::current_harder ? "last" : "previous";
}

std::optional<Preference> parse_preference(std::string_view s) {
    if (s == "last") return Preference::current_harder;
    if (s == "previous") return Preference::previous_harder;
    return std::nullopt;
}

void LikelihoodParams::validate() const {
    if (!(std::isfinite(c_o) && c_o > 0.0)) throw std::invalid_argument("c_o must be positive");
    if (!(std::isfinite(c_p) && c_p > 0.0)) throw std::invalid_argument("c_p must be positive");
    if (!(std::isfinite(t1) && std::isfinite(t2) && t1 < t2))
        throw std::invalid_argument("ordinal thresholds must be finite and strictly increasing");
}

double LikelihoodParams::lower(OrdinalLabel label) const {
    switch (label) {
        case OrdinalLabel::easy: return -std::numeric_limits<double>::infinity();
        case OrdinalLabel::moderate: return t1;
        case OrdinalLabel::hard: return t2;
    }
    throw std::invalid_argument("invalid ordinal label");
}

double LikelihoodParams::upper(OrdinalLabel label) const {
    switch (label) {
        case OrdinalLabel::easy: return t1;
        case OrdinalLabel::moderate: return t2;
        case OrdinalLabel::hard: return std::numeric_limits<double>::infinity();
    }
    throw std::invalid_argument("invalid ordinal label");
}

double ordinal_prob(double f, OrdinalLabel label, const LikelihoodParams& lp) {
    if (std::isnan(f)) throw std::invalid_argument("ordinal_prob: NaN latent");
    switch (label) {
        case OrdinalLabel::easy: return normal_cdf((lp.t1 - f) / lp.c_o);
        case OrdinalLabel::hard: return normal_cdf((f - lp.t2) / lp.c_o);
        case OrdinalLabel::moderate: {
            // Difference taken on whichever tail keeps both terms small.
            const double z1 = (lp.t1 - f) / lp.c_o;
            const double z2 = (lp.t2 - f) / lp.c_o;
            const double p = z1 > 0.0 ? normal_cdf(-z1) - normal_cdf(-z2) : normal_cdf(z2) - normal_cdf(z1);
            return std::max(0.0, p);
        }
    }
    throw std::invalid_argument("invalid ordinal label");
}

double pairwise_prob(double f_curr, double f_prev, const LikelihoodParams& lp) {
    if (!std::isfinite(f_curr) || !std::isfinite(f_prev))
        throw std::invalid_argument("pairwise_prob: non-finite latent");
    return normal_cdf((f_curr - f_prev) / lp.c_p);
}

}  // namespace hilpareto::gp
