#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "facdash/analytics/stats.hpp"
#include "facdash/authz/auth_service.hpp"
#include "facdash/clock.hpp"
#include "facdash/domain/store.hpp"

namespace facdash::analytics {

inline constexpr int kDefaultCohortMin = 4;

struct EvaluationDetails {
  SectionAverages section;
  std::vector<QuestionStats> questions;
};

struct CourseAnalytics {
  domain::CourseId course;
  Metric metric = Metric::course;
  domain::TermWindow window;
  std::string subject_id;
  // The subject's own sections of the course.
  std::vector<SectionAverages> sections;
  DistributionCurve curve;
};

struct TeamFilters {
  std::string name_query;
  std::string course_query;
};

struct TeamSummaryRow {
  std::string user_id;
  std::string name;
  std::int64_t courses_taught = 0;
  std::optional<double> overall_avg_instructor_rating;
  std::optional<double> percentile;
  domain::Cents grant_total;
  std::int64_t publication_count = 0;
  domain::Cents expenditure_total;
};

struct ResearchTotals {
  std::int64_t grant_count = 0;
  domain::Cents grant_total;
  std::int64_t publication_count = 0;
  std::int64_t expenditure_count = 0;
  domain::Cents expenditure_total;
  friend bool operator==(const ResearchTotals&, const ResearchTotals&) = default;
};

struct DashboardSummary {
  std::vector<SectionAverages> recent_evals;
  int year = 0;
  ResearchTotals research_totals;
  std::int64_t pending_actions = 0;
};

ResearchTotals research_totals(domain::Store& store, const std::string& owner_id,
                               const domain::TermWindow& window);

std::optional<double> subject_course_average(domain::Store& store, const std::string& subject_id,
                                             const domain::CourseId& course,
                                             const domain::TermWindow& window, Metric metric);

// Store-backed views. Every call authorizes the principal first; an absent
// subject means the principal.
class AnalyticsService {
 public:
  AnalyticsService(domain::Store& store, const authz::AuthService& auth, const Clock& clock,
                   int cohort_min = kDefaultCohortMin);

  int cohort_min() const noexcept { return cohort_min_; }

  std::vector<SectionAverages> evaluations(const authz::Principal& who,
                                           const std::optional<std::string>& subject,
                                           const domain::TermWindow& window) const;

  // Throws Error{not_found} when the subject has no such section.
  EvaluationDetails question_details(const authz::Principal& who,
                                     const std::optional<std::string>& subject,
                                     const domain::CourseId& course, const std::string& section,
                                     domain::TermRef when) const;

  // The peer distribution carries no per-peer values or identities. Throws
  // Error{insufficient_cohort} below the minimum cohort.
  CourseAnalytics course_distribution(const authz::Principal& who, const domain::CourseId& course,
                                      const domain::TermWindow& window, Metric metric,
                                      const std::optional<std::string>& subject) const;

  std::vector<TeamSummaryRow> team_summary(const authz::Principal& chair,
                                           const domain::TermWindow& window,
                                           const TeamFilters& filters) const;

  DashboardSummary dashboard(const authz::Principal& who) const;

 private:
  const std::string& subject_of(const authz::Principal& who,
                                const std::optional<std::string>& subject) const;

  domain::Store& store_;
  const authz::AuthService& auth_;
  const Clock& clock_;
  int cohort_min_;
};

}  // namespace facdash::analytics
