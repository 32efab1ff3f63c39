#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "facdash/domain/types.hpp"

namespace facdash::analytics {

inline constexpr std::size_t kGridPoints = 201;

enum class Metric { course, instructor };

std::string_view to_string(Metric m) noexcept;
std::optional<Metric> parse_metric(std::string_view s);

struct QuestionStats {
  std::string question_id;
  std::string question_text;
  domain::QuestionCategory category = domain::QuestionCategory::other;
  // Rounded to 4 decimals; absent with no respondents.
  std::optional<double> mean;
  std::array<std::int64_t, 5> histogram{};
  std::int64_t respondents = 0;
  friend bool operator==(const QuestionStats&, const QuestionStats&) = default;
};

struct SectionAverages {
  domain::CourseKey course_key;
  std::string instructor_id;
  std::optional<double> avg_course_rating;
  std::optional<double> avg_instructor_rating;

  std::optional<double> metric(Metric m) const {
    return m == Metric::course ? avg_course_rating : avg_instructor_rating;
  }
  friend bool operator==(const SectionAverages&, const SectionAverages&) = default;
};

struct DistributionCurve {
  std::vector<double> grid;
  std::vector<double> density;
  double bandwidth = 0;
  std::int64_t cohort_n = 0;
  std::optional<double> highlight;
};

// Round half away from zero to the given number of decimals.
double round_to(double x, int decimals);

QuestionStats question_stats(const domain::EvaluationRecord& record);

// Throws Error{mixed_section} if the records disagree on instructor or course
// key, or if there are none.
SectionAverages section_averages(std::span<const domain::EvaluationRecord> records);

// Groups by (instructor, course key); newest term first.
std::vector<SectionAverages> group_sections(std::span<const domain::EvaluationRecord> records);

// Unweighted mean of the metric over sections that have it.
std::optional<double> mean_of_sections(std::span<const SectionAverages> sections, Metric metric);

// Throws Error{value_not_member}.
double percentile_rank(double value, std::span<const double> population);

// Scott's rule. Throws Error{degenerate_sample}.
double kde_bandwidth(std::span<const double> samples);

double kde_density_at(std::span<const double> samples, double bandwidth, double x);

// Throws Error{degenerate_sample} when the bandwidth fails or is too narrow
// for the grid to hold the curve's mass.
DistributionCurve kde_curve(std::span<const double> samples,
                            std::optional<double> highlight = std::nullopt);

double trapezoid_integral(std::span<const double> grid, std::span<const double> density);

}  // namespace facdash::analytics
