#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace observer::feedback {

/// Assessment knobs shared by the feedback engine and the service.
struct AssessmentConfig {
    double gamma_threshold = 0.5;
    int lambda_keywords = 2;
    int beam_width = 3;

    /// Throws ValidationError when a field is out of range.
    void validate() const;
};

enum class Verdict { Pass, Retry };

std::string_view to_string(Verdict v);

/// Message templates; `{keywords}` is the only substitution point.
inline constexpr std::string_view kPassTemplate = "Excellent work, you noticed the {keywords} here!";
inline constexpr std::string_view kRetryTemplate = "Try again! Did you notice the {keywords}?";

struct Feedback {
    Verdict verdict = Verdict::Retry;
    std::string text;
    double score = 0.0;
    std::vector<std::string> keywords;
};

/// "trees", "trees and wind", "trees, wind and rock".
std::string join_keywords(const std::vector<std::string>& keywords);

/// Pass when score >= gamma (inclusive), Retry otherwise. Throws
/// ValidationError on an empty keyword list or a non-finite score.
Feedback generate_feedback(double score, const std::vector<std::string>& keywords,
                           const AssessmentConfig& cfg = {});

}  // namespace observer::feedback
