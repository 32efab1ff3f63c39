#include "facdash/analytics/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <tuple>

namespace facdash::analytics {

using domain::EvaluationRecord;
using domain::QuestionCategory;

std::string_view to_string(Metric m) noexcept {
  return m == Metric::course ? "course" : "instructor";
}

std::optional<Metric> parse_metric(std::string_view s) {
  auto lower = domain::lowercase(s);
  if (lower == "course") return Metric::course;
  if (lower == "instructor") return Metric::instructor;
  return std::nullopt;
}

double round_to(double x, int decimals) {
  double scale = std::pow(10.0, decimals);
  return std::round(x * scale) / scale;
}

namespace {
__extension__ using Wide = __int128;
}  // namespace

QuestionStats question_stats(const EvaluationRecord& record) {
  QuestionStats s;
  s.question_id = record.question_id;
  s.question_text = record.question_text;
  s.category = record.category;
  s.histogram = record.responses;
  Wide weighted = 0;
  for (std::size_t k = 0; k < 5; ++k) {
    s.respondents += record.responses[k];
    weighted += static_cast<Wide>(k + 1) * record.responses[k];
  }
  if (s.respondents > 0) {
    // Integer half-up rounding of weighted / respondents to 1e-4.
    Wide r = s.respondents;
    Wide q = (2 * weighted * 10000 + r) / (2 * r);
    s.mean = static_cast<double>(q) / 10000.0;
  }
  return s;
}

namespace {

auto section_key(const EvaluationRecord& r) {
  const auto& k = r.course_key;
  return std::tie(r.instructor_id, k.prefix, k.number, k.section, k.term, k.year);
}

std::optional<double> mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return std::nullopt;
  double sum = 0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

}  // namespace

SectionAverages section_averages(std::span<const EvaluationRecord> records) {
  if (records.empty()) throw Error(ErrorCode::mixed_section, "no records for section");
  for (const auto& r : records) {
    if (section_key(r) != section_key(records.front())) {
      throw Error(ErrorCode::mixed_section, "records belong to different sections");
    }
  }
  std::vector<double> course, instructor;
  for (const auto& r : records) {
    auto stats = question_stats(r);
    if (!stats.mean) continue;
    if (r.category == QuestionCategory::course) course.push_back(*stats.mean);
    if (r.category == QuestionCategory::instructor) instructor.push_back(*stats.mean);
  }
  SectionAverages out;
  out.course_key = records.front().course_key;
  out.instructor_id = records.front().instructor_id;
  out.avg_course_rating = mean_of(course);
  out.avg_instructor_rating = mean_of(instructor);
  return out;
}

std::vector<SectionAverages> group_sections(std::span<const EvaluationRecord> records) {
  using Key = std::tuple<std::string, std::string, std::string, std::string, domain::Term, int>;
  std::map<Key, std::vector<EvaluationRecord>> groups;
  for (const auto& r : records) groups[Key(section_key(r))].push_back(r);

  std::vector<SectionAverages> out;
  out.reserve(groups.size());
  for (const auto& [key, rs] : groups) out.push_back(section_averages(rs));
  std::stable_sort(out.begin(), out.end(), [](const SectionAverages& a, const SectionAverages& b) {
    return domain::newest_first(a.course_key, b.course_key);
  });
  return out;
}

std::optional<double> mean_of_sections(std::span<const SectionAverages> sections, Metric metric) {
  std::vector<double> xs;
  for (const auto& s : sections) {
    if (auto v = s.metric(metric)) xs.push_back(*v);
  }
  return mean_of(xs);
}

double percentile_rank(double value, std::span<const double> population) {
  std::int64_t below = 0, equal = 0;
  for (double x : population) {
    if (x < value) ++below;
    if (x == value) ++equal;
  }
  if (equal == 0) {
    throw Error(ErrorCode::value_not_member, "value is not a member of the population");
  }
  // Tenths of 100 * (below + equal / 2) / n, rounded half-up in integers so
  // ties at .x5 never depend on floating-point error.
  auto n = static_cast<std::int64_t>(population.size());
  std::int64_t tenths = (2000 * (2 * below + equal) + 2 * n) / (4 * n);
  return static_cast<double>(tenths) / 10.0;
}

double kde_bandwidth(std::span<const double> samples) {
  if (samples.size() < 2) {
    throw Error(ErrorCode::degenerate_sample, "at least two samples are needed");
  }
  auto n = static_cast<double>(samples.size());
  double mean = 0;
  for (double x : samples) mean += x;
  mean /= n;
  double ss = 0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  double sd = std::sqrt(ss / (n - 1));
  if (!(sd > 0) || !std::isfinite(sd)) {
    throw Error(ErrorCode::degenerate_sample, "samples have no spread");
  }
  return sd * std::pow(n, -0.2);
}

double kde_density_at(std::span<const double> samples, double bandwidth, double x) {
  const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * bandwidth *
                             static_cast<double>(samples.size()));
  double sum = 0;
  for (double s : samples) {
    double z = (x - s) / bandwidth;
    sum += std::exp(-0.5 * z * z);
  }
  return sum * norm;
}

double trapezoid_integral(std::span<const double> grid, std::span<const double> density) {
  double total = 0;
  for (std::size_t i = 1; i < grid.size() && i < density.size(); ++i) {
    total += 0.5 * (density[i] + density[i - 1]) * (grid[i] - grid[i - 1]);
  }
  return total;
}

DistributionCurve kde_curve(std::span<const double> samples, std::optional<double> highlight) {
  DistributionCurve c;
  c.bandwidth = kde_bandwidth(samples);
  c.cohort_n = static_cast<std::int64_t>(samples.size());
  c.highlight = highlight;

  auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  double lo = std::min(1.0, *lo_it) - 3 * c.bandwidth;
  double hi = std::max(5.0, *hi_it) + 3 * c.bandwidth;
  double step = (hi - lo) / static_cast<double>(kGridPoints - 1);
  c.grid.reserve(kGridPoints);
  c.density.reserve(kGridPoints);
  for (std::size_t i = 0; i < kGridPoints; ++i) {
    double x = i + 1 == kGridPoints ? hi : lo + step * static_cast<double>(i);
    c.grid.push_back(x);
    c.density.push_back(kde_density_at(samples, c.bandwidth, x));
  }

  double mass = trapezoid_integral(c.grid, c.density);
  if (mass < 0.99 || mass > 1.01) {
    throw Error(ErrorCode::degenerate_sample, "samples are too tightly clustered to plot");
  }
  return c;
}

}  // namespace facdash::analytics
