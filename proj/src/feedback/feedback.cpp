#include "observer/feedback/feedback.hpp"

#include <cmath>

#include "observer/error.hpp"

namespace observer::feedback {

namespace {

std::string render(std::string_view tmpl, const std::string& keywords)
{
    constexpr std::string_view slot = "{keywords}";
    std::string out(tmpl);
    out.replace(out.find(slot), slot.size(), keywords);
    return out;
}

}  // namespace

void AssessmentConfig::validate() const
{
    if (!(gamma_threshold >= 0.0 && gamma_threshold <= 1.0)) {
        throw ValidationError("gamma_threshold must lie in [0, 1]");
    }
    if (lambda_keywords < 1) throw ValidationError("lambda_keywords must be >= 1");
    if (beam_width < 1) throw ValidationError("beam_width must be >= 1");
}

std::string_view to_string(Verdict v)
{
    return v == Verdict::Pass ? "Pass" : "Retry";
}

std::string join_keywords(const std::vector<std::string>& keywords)
{
    std::string out;
    for (std::size_t i = 0; i < keywords.size(); ++i) {
        if (i > 0) out += i + 1 == keywords.size() ? " and " : ", ";
        out += keywords[i];
    }
    return out;
}

Feedback generate_feedback(double score, const std::vector<std::string>& keywords,
                           const AssessmentConfig& cfg)
{
    if (keywords.empty()) throw ValidationError("generate_feedback: keyword list is empty");
    if (!std::isfinite(score)) throw ValidationError("generate_feedback: score is not finite");
    Feedback fb;
    fb.score = score;
    fb.keywords = keywords;
    fb.verdict = score >= cfg.gamma_threshold ? Verdict::Pass : Verdict::Retry;
    fb.text = render(fb.verdict == Verdict::Pass ? kPassTemplate : kRetryTemplate,
                     join_keywords(keywords));
    return fb;
}

}  // namespace observer::feedback
