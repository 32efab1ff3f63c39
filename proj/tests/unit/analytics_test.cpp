#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "facdash/analytics/service.hpp"
#include "facdash/analytics/stats.hpp"
#include "support/world.hpp"

namespace facdash::analytics {
namespace {

using domain::QuestionCategory;
using domain::Term;
using domain::TermWindow;
using testing::make_eval;

domain::EvaluationRecord rec(std::array<std::int64_t, 5> counts,
                             QuestionCategory cat = QuestionCategory::course,
                             std::string q = "Q1") {
  return make_eval("usr_a", "CSCE", "145", "001", Term::fall, 2023, std::move(q), cat, counts);
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::bad_request;
}

// ---------------------------------------------------------------------------
// Question and section statistics

TEST(QuestionStats, Examples) {
  auto a = question_stats(rec({0, 0, 1, 1, 0}));
  EXPECT_EQ(a.mean, 3.5);
  EXPECT_EQ(a.respondents, 2);
  EXPECT_EQ(question_stats(rec({5, 0, 0, 0, 0})).mean, 1.0);
  auto none = question_stats(rec({0, 0, 0, 0, 0}));
  EXPECT_EQ(none.respondents, 0);
  EXPECT_FALSE(none.mean);
}

TEST(QuestionStats, MeanIsExactRatioRoundedToFourPlaces) {
  std::mt19937 rng(11);
  for (int i = 0; i < 2000; ++i) {
    std::array<std::int64_t, 5> c{};
    std::int64_t n = 0, w = 0;
    for (int k = 0; k < 5; ++k) {
      c[k] = rng() % 50;
      n += c[k];
      w += (k + 1) * c[k];
    }
    auto s = question_stats(rec(c));
    if (n == 0) {
      EXPECT_FALSE(s.mean);
      continue;
    }
    // Oracle: the rounded value is the closest multiple of 1e-4, with the
    // half-way case rounding up.
    long double exact = static_cast<long double>(w) / n;
    EXPECT_LE(std::fabs(static_cast<long double>(*s.mean) - exact), 0.00005L + 1e-12L);
    EXPECT_NEAR(*s.mean * 10000, std::round(*s.mean * 10000), 1e-6);
    EXPECT_GE(*s.mean, 1.0);
    EXPECT_LE(*s.mean, 5.0);
  }
}

TEST(QuestionStats, MergedHistogramIsRespondentWeightedCombination) {
  std::mt19937 rng(12);
  for (int i = 0; i < 500; ++i) {
    std::array<std::int64_t, 5> a{}, b{}, sum{};
    for (int k = 0; k < 5; ++k) {
      a[k] = rng() % 30;
      b[k] = rng() % 30;
      sum[k] = a[k] + b[k];
    }
    auto sa = question_stats(rec(a)), sb = question_stats(rec(b)), ss = question_stats(rec(sum));
    EXPECT_EQ(ss.respondents, sa.respondents + sb.respondents);
    if (!sa.mean || !sb.mean) continue;
    double combined = (*sa.mean * static_cast<double>(sa.respondents) +
                       *sb.mean * static_cast<double>(sb.respondents)) /
                      static_cast<double>(ss.respondents);
    // Each part carries at most 5e-5 rounding error, as does the merge.
    EXPECT_NEAR(*ss.mean, combined, 1e-4 + 1e-12);
  }
}

TEST(SectionAverages, Examples) {
  std::vector two_course{rec({0, 0, 1, 1, 0}, QuestionCategory::course, "C1"),
                         rec({0, 0, 0, 1, 1}, QuestionCategory::course, "C2")};
  auto s = section_averages(two_course);
  EXPECT_DOUBLE_EQ(*s.avg_course_rating, 4.0);
  EXPECT_FALSE(s.avg_instructor_rating);

  std::vector only_instructor{rec({0, 0, 0, 0, 3}, QuestionCategory::instructor)};
  s = section_averages(only_instructor);
  EXPECT_FALSE(s.avg_course_rating);
  EXPECT_EQ(s.avg_instructor_rating, 5.0);

  std::vector other{rec({1, 1, 1, 1, 1}, QuestionCategory::other)};
  s = section_averages(other);
  EXPECT_FALSE(s.avg_course_rating);
  EXPECT_FALSE(s.avg_instructor_rating);
}

TEST(SectionAverages, QuestionsWithoutRespondentsIgnored) {
  std::vector rs{rec({0, 0, 0, 0, 0}, QuestionCategory::course, "C1"),
                 rec({0, 0, 0, 2, 0}, QuestionCategory::course, "C2")};
  EXPECT_EQ(section_averages(rs).avg_course_rating, 4.0);
}

TEST(SectionAverages, MixedSectionRejected) {
  auto a = rec({1, 0, 0, 0, 0});
  auto b = a;
  b.course_key.section = "002";
  std::vector rs{a, b};
  EXPECT_EQ(code_of([&] { section_averages(rs); }), ErrorCode::mixed_section);
  b = a;
  b.instructor_id = "usr_b";
  rs = {a, b};
  EXPECT_EQ(code_of([&] { section_averages(rs); }), ErrorCode::mixed_section);
}

TEST(SectionAverages, GroupingOrdersNewestFirst) {
  auto old = rec({0, 0, 0, 0, 1});
  old.course_key.year = 2021;
  auto spring = rec({0, 0, 0, 1, 0});
  spring.course_key.term = Term::spring;
  auto fall = rec({0, 0, 1, 0, 0});
  std::vector rs{old, spring, fall};
  auto g = group_sections(rs);
  ASSERT_EQ(g.size(), 3u);
  EXPECT_EQ(g[0].avg_course_rating, 3.0);
  EXPECT_EQ(g[1].avg_course_rating, 4.0);
  EXPECT_EQ(g[2].avg_course_rating, 5.0);
}

// ---------------------------------------------------------------------------
// Percentile

double counting_oracle(double v, const std::vector<double>& pop) {
  int below = 0, equal = 0;
  for (double x : pop) {
    below += x < v;
    equal += x == v;
  }
  double p = 100.0 * (below + 0.5 * equal) / static_cast<double>(pop.size());
  return std::round(p * 10) / 10;
}

TEST(Percentile, Examples) {
  std::vector<double> one{4.2}, three{3.0, 4.0, 5.0}, ties{2.0, 2.0, 4.0, 4.0};
  EXPECT_EQ(percentile_rank(4.2, one), 50.0);
  EXPECT_EQ(percentile_rank(4.0, three), 50.0);
  EXPECT_EQ(percentile_rank(4.0, ties), 75.0);
  EXPECT_EQ(code_of([&] { percentile_rank(3.0, ties); }), ErrorCode::value_not_member);
}

TEST(Percentile, MatchesCountingOracle) {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> pop(1 + rng() % 50);
    for (auto& x : pop) x = 1.0 + static_cast<double>(rng() % 9) * 0.5;
    for (double v : pop) ASSERT_EQ(percentile_rank(v, pop), counting_oracle(v, pop));
  }
}

TEST(Percentile, AppendingLargerValueNeverRaisesRank) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(1, 5);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> pop(1 + rng() % 30);
    for (auto& x : pop) x = std::round(u(rng) * 4) / 4;
    double v = pop[rng() % pop.size()];
    double before = percentile_rank(v, pop);
    pop.push_back(v + 0.25 + u(rng));
    EXPECT_LE(percentile_rank(v, pop), before);
  }
}

// ---------------------------------------------------------------------------
// KDE

double normal_pdf(double z) { return std::exp(-z * z / 2) / std::sqrt(2 * M_PI); }

TEST(Kde, BandwidthExamples) {
  std::vector<double> two{3, 5};
  EXPECT_NEAR(kde_bandwidth(two), std::sqrt(2.0) * std::pow(2.0, -0.2), 1e-12);
  EXPECT_NEAR(kde_bandwidth(two), 1.2311, 1e-3);
  std::vector<double> flat{4, 4, 4}, single{4};
  EXPECT_EQ(code_of([&] { kde_bandwidth(flat); }), ErrorCode::degenerate_sample);
  EXPECT_EQ(code_of([&] { kde_bandwidth(single); }), ErrorCode::degenerate_sample);
  EXPECT_EQ(code_of([&] { kde_curve(single); }), ErrorCode::degenerate_sample);
}

TEST(Kde, CurveMatchesDirectFormula) {
  std::vector<double> s{2.5, 3.1, 4.0, 4.7, 4.9};
  auto c = kde_curve(s, 4.0);
  ASSERT_EQ(c.grid.size(), kGridPoints);
  ASSERT_EQ(c.density.size(), kGridPoints);
  EXPECT_EQ(c.cohort_n, 5);
  EXPECT_EQ(c.highlight, 4.0);
  double h = c.bandwidth;
  EXPECT_NEAR(c.grid.front(), 1.0 - 3 * h, 1e-12);
  EXPECT_NEAR(c.grid.back(), 5.0 + 3 * h, 1e-12);
  for (std::size_t i = 0; i < kGridPoints; ++i) {
    double expect = 0;
    for (double si : s) expect += normal_pdf((c.grid[i] - si) / h);
    expect /= static_cast<double>(s.size()) * h;
    EXPECT_NEAR(c.density[i], expect, 1e-12);
  }
}

TEST(Kde, SymmetricPairIsMirrored) {
  std::vector<double> s{3, 5};
  auto c = kde_curve(s);
  // The grid [1-3h, 5+3h] is symmetric about 3 only after re-centring, so
  // compare the density function on mirrored points about the midpoint 4.
  for (double t = 0; t < 3; t += 0.01) {
    EXPECT_NEAR(kde_density_at(s, c.bandwidth, 3 + t), kde_density_at(s, c.bandwidth, 5 - t),
                1e-12);
  }
}

TEST(Kde, IntegralAndArgmax) {
  std::vector<double> s{2, 3, 4, 5};
  auto c = kde_curve(s);
  double area = 0;
  for (std::size_t i = 1; i < c.grid.size(); ++i) {
    area += (c.grid[i] - c.grid[i - 1]) * (c.density[i] + c.density[i - 1]) / 2;
  }
  EXPECT_GE(area, 0.99);
  EXPECT_LE(area, 1.01);

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(1, 5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> xs(2 + rng() % 30);
    for (auto& x : xs) x = u(rng);
    auto curve = kde_curve(xs);
    auto peak = std::max_element(curve.density.begin(), curve.density.end()) -
                curve.density.begin();
    auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
    EXPECT_GE(curve.grid[peak], *lo - curve.bandwidth);
    EXPECT_LE(curve.grid[peak], *hi + curve.bandwidth);
    for (std::size_t i = 1; i < curve.grid.size(); ++i) {
      EXPECT_GT(curve.grid[i], curve.grid[i - 1]);
      EXPECT_GE(curve.density[i], 0.0);
    }
  }
}

TEST(Kde, ShiftEquivariance) {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(1, 5), shift(-2, 2);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> xs(4 + rng() % 20);
    for (auto& x : xs) x = u(rng);
    double c = shift(rng);
    auto moved = xs;
    for (auto& x : moved) x += c;
    double h = kde_bandwidth(xs);
    EXPECT_NEAR(kde_bandwidth(moved), h, 1e-12);
    auto curve = kde_curve(xs);
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
      EXPECT_NEAR(kde_density_at(moved, h, curve.grid[i] + c), curve.density[i], 1e-9);
    }
  }
}

TEST(Kde, TightClusterIsDegenerate) {
  std::vector<double> s{3.0, 3.0, 3.0, 3.0001};
  EXPECT_EQ(code_of([&] { kde_curve(s); }), ErrorCode::degenerate_sample);
}

// ---------------------------------------------------------------------------
// Store-backed views

// One section whose course and instructor questions both average `mean`
// (a whole number, so each student answers exactly that).
std::vector<domain::EvaluationRecord> section(const std::string& who, const std::string& number,
                                              const std::string& sec, Term term, int year,
                                              int mean) {
  std::array<std::int64_t, 5> counts{};
  counts[static_cast<std::size_t>(mean - 1)] = 10;
  return {make_eval(who, "CSCE", number, sec, term, year, "C1", QuestionCategory::course, counts),
          make_eval(who, "CSCE", number, sec, term, year, "I1", QuestionCategory::instructor,
                    counts)};
}

class ServiceTest : public ::testing::Test {
 protected:
  void put(const std::vector<domain::EvaluationRecord>& rs) { w.store->put_evaluations(rs, w.dept); }

  testing::World w;
  AnalyticsService svc{*w.store, *w.auth, w.clock};
  domain::CourseId csce145{"CSCE", "145"};
};

TEST_F(ServiceTest, SubjectCourseAverage) {
  auto f = w.add_faculty("preston@example.edu", "Preston", "Presents");
  put(section(f.user.id, "145", "001", Term::fall, 2023, 4));
  put(section(f.user.id, "145", "002", Term::spring, 2024, 5));
  put(section(f.user.id, "146", "001", Term::spring, 2024, 1));
  auto all = TermWindow::all_time();
  EXPECT_EQ(subject_course_average(*w.store, f.user.id, csce145, all, Metric::course), 4.5);
  EXPECT_EQ(subject_course_average(*w.store, f.user.id, csce145, TermWindow::years(2024, 2024),
                                   Metric::instructor),
            5.0);
  EXPECT_FALSE(subject_course_average(*w.store, f.user.id, csce145, TermWindow::years(2010, 2012),
                                      Metric::course));
}

TEST_F(ServiceTest, DistributionForFacultyCarriesOnlyOwnValue) {
  std::vector<authz::Principal> fac;
  const char* names[] = {"Ann", "Ben", "Cal", "Dee", "Eve"};
  for (int i = 0; i < 5; ++i) {
    fac.push_back(w.add_faculty(std::string(names[i]) + "@example.edu", names[i], "Member"));
    put(section(fac.back().user.id, "145", "00" + std::to_string(i), Term::fall, 2023, i + 1));
  }
  auto out = svc.course_distribution(fac[2], csce145, TermWindow::all_time(), Metric::course,
                                     std::nullopt);
  EXPECT_EQ(out.curve.cohort_n, 5);
  EXPECT_EQ(out.curve.highlight, 3.0);
  EXPECT_EQ(out.subject_id, fac[2].user.id);
  ASSERT_EQ(out.sections.size(), 1u);
  EXPECT_EQ(out.sections[0].instructor_id, fac[2].user.id);

  // A chair may highlight any member.
  auto chosen = svc.course_distribution(w.chair, csce145, TermWindow::all_time(),
                                        Metric::instructor, fac[4].user.id);
  EXPECT_EQ(chosen.curve.highlight, 5.0);

  EXPECT_EQ(code_of([&] {
              svc.course_distribution(fac[0], csce145, TermWindow::all_time(), Metric::course,
                                      fac[1].user.id);
            }),
            ErrorCode::wrong_role);
  auto outsider = w.outsider("out@example.edu");
  EXPECT_EQ(code_of([&] {
              svc.course_distribution(w.chair, csce145, TermWindow::all_time(), Metric::course,
                                      outsider.user.id);
            }),
            ErrorCode::out_of_scope);
}

TEST_F(ServiceTest, SmallCohortWithheld) {
  for (int i = 0; i < 3; ++i) {
    auto f = w.add_faculty("f" + std::to_string(i) + "@example.edu", "F", std::to_string(i));
    put(section(f.user.id, "145", "001", Term::fall, 2023, i + 2));
  }
  EXPECT_EQ(code_of([&] {
              svc.course_distribution(w.chair, csce145, TermWindow::all_time(), Metric::course,
                                      std::nullopt);
            }),
            ErrorCode::insufficient_cohort);
  AnalyticsService lenient(*w.store, *w.auth, w.clock, 3);
  EXPECT_EQ(lenient
                .course_distribution(w.chair, csce145, TermWindow::all_time(), Metric::course,
                                     std::nullopt)
                .curve.cohort_n,
            3);
}

TEST_F(ServiceTest, DeletedInstructorsStayInCohort) {
  std::vector<authz::Principal> fac;
  for (int i = 0; i < 4; ++i) {
    fac.push_back(w.add_faculty("g" + std::to_string(i) + "@example.edu", "G", std::to_string(i)));
    put(section(fac.back().user.id, "145", "001", Term::fall, 2023, i + 1));
  }
  w.auth->delete_user(w.chair, fac[3].user.id);
  auto out = svc.course_distribution(fac[0], csce145, TermWindow::all_time(), Metric::course,
                                     std::nullopt);
  EXPECT_EQ(out.curve.cohort_n, 4);
}

TEST_F(ServiceTest, TeamSummary) {
  auto p = w.add_faculty("preston@example.edu", "Preston", "Presents");
  auto q = w.add_faculty("quinn@example.edu", "Quinn", "Quiet");
  put(section(p.user.id, "145", "001", Term::fall, 2023, 4));
  w.store->put_research_item({"", p.user.id, testing::make_grant("G", 125000, 2023)});

  auto rows = svc.team_summary(w.chair, TermWindow::all_time(), {});
  ASSERT_EQ(rows.size(), 3u);  // chair, Preston, Quinn
  const TeamSummaryRow* pr = nullptr;
  for (const auto& r : rows) {
    if (r.user_id == p.user.id) pr = &r;
    if (r.user_id != p.user.id) {
      EXPECT_FALSE(r.percentile);
      EXPECT_EQ(r.courses_taught, 0);
    }
  }
  ASSERT_TRUE(pr);
  EXPECT_EQ(pr->percentile, 50.0);
  EXPECT_EQ(pr->overall_avg_instructor_rating, 4.0);
  EXPECT_EQ(pr->courses_taught, 1);
  EXPECT_EQ(pr->grant_total.value, 125000);

  auto named = svc.team_summary(w.chair, TermWindow::all_time(), {"pre", ""});
  ASSERT_EQ(named.size(), 1u);
  EXPECT_EQ(named[0].user_id, p.user.id);
  auto by_course = svc.team_summary(w.chair, TermWindow::all_time(), {"", "csce 145"});
  ASSERT_EQ(by_course.size(), 1u);
  EXPECT_EQ(svc.team_summary(w.chair, TermWindow::years(2030, 2031), {"", "CSCE145"}).size(), 0u);

  EXPECT_EQ(code_of([&] { svc.team_summary(q, TermWindow::all_time(), {}); }),
            ErrorCode::wrong_role);
}

TEST_F(ServiceTest, TeamPercentilesOverWholeDepartment) {
  std::vector<std::string> ids;
  for (int i = 0; i < 4; ++i) {
    auto f = w.add_faculty("h" + std::to_string(i) + "@example.edu", "H" + std::to_string(i), "X");
    put(section(f.user.id, "145", "001", Term::fall, 2023, i + 2));
    ids.push_back(f.user.id);
  }
  // Filtering does not change the comparison population.
  auto rows = svc.team_summary(w.chair, TermWindow::all_time(), {"H3", ""});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].percentile, 87.5);
}

TEST_F(ServiceTest, DashboardCapsRecentEvaluations) {
  auto f = w.add_faculty("preston@example.edu", "Preston", "Presents");
  auto empty = svc.dashboard(f);
  EXPECT_TRUE(empty.recent_evals.empty());
  EXPECT_EQ(empty.research_totals, ResearchTotals{});
  EXPECT_EQ(empty.pending_actions, 0);

  std::vector<domain::CourseKey> keys;
  for (int y = 2019; y < 2022; ++y) {
    for (auto t : {Term::spring, Term::fall}) {
      put(section(f.user.id, "145", "001", t, y, 3));
      keys.push_back({"CSCE", "145", "001", t, y});
    }
  }
  std::sort(keys.begin(), keys.end(), domain::newest_first);
  auto d = svc.dashboard(f);
  ASSERT_EQ(d.recent_evals.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(d.recent_evals[i].course_key, keys[i]);

  w.auth->create_user(w.chair, {"new@example.edu", "New", "Hire"}, authz::CreationMode::invite);
  EXPECT_EQ(svc.dashboard(w.chair).pending_actions, 1);
}

TEST_F(ServiceTest, EvaluationViewsRespectScope) {
  auto f = w.add_faculty("preston@example.edu", "Preston", "Presents");
  auto g = w.add_faculty("quinn@example.edu", "Quinn", "Quiet");
  put(section(f.user.id, "145", "001", Term::fall, 2023, 4));
  EXPECT_EQ(svc.evaluations(f, std::nullopt, TermWindow::all_time()).size(), 1u);
  EXPECT_EQ(svc.evaluations(w.chair, f.user.id, TermWindow::all_time()).size(), 1u);
  EXPECT_EQ(code_of([&] { svc.evaluations(g, f.user.id, TermWindow::all_time()); }),
            ErrorCode::out_of_scope);

  auto details = svc.question_details(f, std::nullopt, csce145, "001", {Term::fall, 2023});
  ASSERT_EQ(details.questions.size(), 2u);
  EXPECT_EQ(details.questions[0].question_id, "C1");
  EXPECT_EQ(details.section.avg_instructor_rating, 4.0);
  EXPECT_EQ(code_of([&] {
              svc.question_details(f, std::nullopt, csce145, "001", {Term::spring, 2023});
            }),
            ErrorCode::not_found);
}

}  // namespace
}  // namespace facdash::analytics
