#pragma once

#include <optional>
#include <string_view>

namespace hilpareto::gp {

/// Three ordered challenge classes; the underlying value is the ordinal index.
enum class OrdinalLabel { easy = 1, moderate = 2, hard = 3 };

/// Answer to "which of the last two trials was harder?".
enum class Preference { current_harder, previous_harder };

std::string_view to_string(OrdinalLabel label);
std::optional<OrdinalLabel> parse_label(std::string_view s);
std::string_view to_string(Preference p);
std::optional<Preference> parse_preference(std::string_view s);

/// Probit noise scales and the two finite ordinal thresholds
/// (the outer thresholds are -inf and +inf).
struct LikelihoodParams {
    double c_o = 1.0;
    double c_p = 0.5;
    double t1 = -0.5;
    double t2 = 0.5;

    void validate() const;
    /// Lower and upper bin edges for a label.
    double lower(OrdinalLabel label) const;
    double upper(OrdinalLabel label) const;
};

/// Probability clamp applied before taking logs.
inline constexpr double kProbFloor = 1e-12;

/// P(label | f) = Phi((t_j - f)/c_o) - Phi((t_{j-1} - f)/c_o).
double ordinal_prob(double f, OrdinalLabel label, const LikelihoodParams& lp);

/// Probability that the current trial is judged harder than the previous one.
double pairwise_prob(double f_curr, double f_prev, const LikelihoodParams& lp);

}  // namespace hilpareto::gp
