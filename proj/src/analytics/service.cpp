#include "facdash/analytics/service.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace facdash::analytics {

using authz::Action;
using authz::Principal;
using domain::CourseId;
using domain::EvaluationScope;
using domain::ResearchKind;
using domain::TermWindow;

ResearchTotals research_totals(domain::Store& store, const std::string& owner_id,
                               const TermWindow& window) {
  domain::ResearchScope scope;
  scope.owners = std::vector<std::string>{owner_id};
  scope.window = window;
  ResearchTotals t;
  for (const auto& item : store.query_research(ResearchKind::grant, scope)) {
    ++t.grant_count;
    t.grant_total.value += std::get<domain::Grant>(item.body).amount.value;
  }
  t.publication_count =
      static_cast<std::int64_t>(store.query_research(ResearchKind::publication, scope).size());
  for (const auto& item : store.query_research(ResearchKind::expenditure, scope)) {
    ++t.expenditure_count;
    t.expenditure_total.value += std::get<domain::Expenditure>(item.body).amount.value;
  }
  return t;
}

std::optional<double> subject_course_average(domain::Store& store, const std::string& subject_id,
                                             const CourseId& course, const TermWindow& window,
                                             Metric metric) {
  EvaluationScope scope;
  scope.instructors = std::vector<std::string>{subject_id};
  scope.course = course;
  scope.window = window;
  auto sections = group_sections(store.query_evaluations(scope));
  return mean_of_sections(sections, metric);
}

AnalyticsService::AnalyticsService(domain::Store& store, const authz::AuthService& auth,
                                   const Clock& clock, int cohort_min)
    : store_(store), auth_(auth), clock_(clock), cohort_min_(cohort_min) {}

const std::string& AnalyticsService::subject_of(const Principal& who,
                                                const std::optional<std::string>& subject) const {
  return subject && !subject->empty() ? *subject : who.user.id;
}

std::vector<SectionAverages> AnalyticsService::evaluations(
    const Principal& who, const std::optional<std::string>& subject,
    const TermWindow& window) const {
  auth_.require(who, Action::view_evaluations, subject);
  EvaluationScope scope;
  scope.instructors = std::vector<std::string>{subject_of(who, subject)};
  scope.window = window;
  return group_sections(store_.query_evaluations(scope));
}

EvaluationDetails AnalyticsService::question_details(const Principal& who,
                                                     const std::optional<std::string>& subject,
                                                     const CourseId& course,
                                                     const std::string& section,
                                                     domain::TermRef when) const {
  auth_.require(who, Action::view_evaluations, subject);
  EvaluationScope scope;
  scope.instructors = std::vector<std::string>{subject_of(who, subject)};
  scope.course = course;
  scope.section = section;
  scope.window = TermWindow{when, when};
  auto records = store_.query_evaluations(scope);
  if (records.empty()) throw Error(ErrorCode::not_found, "no evaluations for this section");

  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return a.question_id < b.question_id;
  });
  EvaluationDetails out;
  out.section = section_averages(records);
  for (const auto& r : records) out.questions.push_back(question_stats(r));
  return out;
}

CourseAnalytics AnalyticsService::course_distribution(
    const Principal& who, const CourseId& course, const TermWindow& window, Metric metric,
    const std::optional<std::string>& subject) const {
  auth_.require(who, Action::view_course_analytics, subject);
  if (window.empty()) throw Error(ErrorCode::bad_request, "window is empty");

  CourseAnalytics out;
  out.course = course;
  out.metric = metric;
  out.window = window;
  out.subject_id = subject_of(who, subject);

  EvaluationScope scope;
  scope.department_id = who.user.department_id;
  scope.course = course;
  scope.window = window;
  std::map<std::string, std::vector<domain::EvaluationRecord>> by_instructor;
  for (auto& r : store_.query_evaluations(scope)) by_instructor[r.instructor_id].push_back(r);

  std::vector<double> samples;
  std::optional<double> highlight;
  for (const auto& [instructor, records] : by_instructor) {
    auto sections = group_sections(records);
    auto avg = mean_of_sections(sections, metric);
    if (!avg) continue;
    samples.push_back(*avg);
    if (instructor == out.subject_id) {
      highlight = avg;
      out.sections = std::move(sections);
    }
  }
  if (static_cast<int>(samples.size()) < cohort_min_) {
    throw Error(ErrorCode::insufficient_cohort,
                "too few instructors taught this course to show a distribution");
  }
  out.curve = kde_curve(samples, highlight);
  return out;
}

std::vector<TeamSummaryRow> AnalyticsService::team_summary(const Principal& chair,
                                                           const TermWindow& window,
                                                           const TeamFilters& filters) const {
  auth_.require(chair, Action::view_team);
  domain::UserScope members_scope;
  members_scope.department_id = chair.user.department_id;
  auto members = store_.query_users(members_scope);

  EvaluationScope scope;
  scope.department_id = chair.user.department_id;
  scope.window = window;
  std::map<std::string, std::vector<domain::EvaluationRecord>> by_instructor;
  for (auto& r : store_.query_evaluations(scope)) by_instructor[r.instructor_id].push_back(r);

  struct Teaching {
    std::set<CourseId> courses;
    std::optional<double> overall;
  };
  std::map<std::string, Teaching> teaching;
  std::vector<double> population;
  for (const auto& m : members) {
    Teaching t;
    if (auto it = by_instructor.find(m.id); it != by_instructor.end()) {
      auto sections = group_sections(it->second);
      for (const auto& s : sections) t.courses.insert(s.course_key.course());
      t.overall = mean_of_sections(sections, Metric::instructor);
    }
    if (t.overall) population.push_back(*t.overall);
    teaching.emplace(m.id, std::move(t));
  }

  std::vector<TeamSummaryRow> rows;
  for (const auto& m : members) {
    const auto& t = teaching.at(m.id);
    if (!domain::contains_case_insensitive(m.display_name(), filters.name_query)) continue;
    if (!filters.course_query.empty()) {
      bool match = std::any_of(t.courses.begin(), t.courses.end(), [&](const CourseId& c) {
        return domain::contains_case_insensitive(c.display(), filters.course_query) ||
               domain::contains_case_insensitive(c.prefix + c.number, filters.course_query);
      });
      if (!match) continue;
    }
    TeamSummaryRow row;
    row.user_id = m.id;
    row.name = m.display_name();
    row.courses_taught = static_cast<std::int64_t>(t.courses.size());
    row.overall_avg_instructor_rating = t.overall;
    if (t.overall) row.percentile = percentile_rank(*t.overall, population);
    auto totals = research_totals(store_, m.id, window);
    row.grant_total = totals.grant_total;
    row.publication_count = totals.publication_count;
    row.expenditure_total = totals.expenditure_total;
    rows.push_back(std::move(row));
  }
  return rows;
}

DashboardSummary AnalyticsService::dashboard(const Principal& who) const {
  auth_.require(who, Action::view_dashboard);
  DashboardSummary out;
  EvaluationScope scope;
  scope.instructors = std::vector<std::string>{who.user.id};
  out.recent_evals = group_sections(store_.query_evaluations(scope));
  if (out.recent_evals.size() > 4) out.recent_evals.resize(4);

  auto now = clock_.now();
  out.year = static_cast<int>(
      std::chrono::year_month_day(std::chrono::floor<std::chrono::days>(now)).year());
  out.research_totals = research_totals(store_, who.user.id, TermWindow::years(out.year, out.year));
  out.pending_actions = store_.count_open_invites(who.user.id, now);
  return out;
}

}  // namespace facdash::analytics
