#include "facdash/api/seed.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <random>

#include "facdash/ingest/workbook.hpp"

namespace facdash::api {

namespace {

constexpr std::array kFirstNames{"Ada",   "Grace", "Alan",  "Edsger", "Barbara", "Donald",
                                 "Frances", "John", "Radia", "Ken",   "Margaret", "Niklaus"};
constexpr std::array kLastNames{"Lovelace", "Hopper", "Turing",  "Dijkstra", "Liskov", "Knuth",
                                "Allen",    "Backus", "Perlman", "Thompson", "Hamilton", "Wirth"};
constexpr std::array kAgencies{"NSF", "DOE", "NIH", "DARPA", "ONR"};
constexpr std::array kVenues{"ICSE", "PLDI", "SIGCSE", "VLDB", "NeurIPS", "CHI"};

std::string lower_ascii(std::string s) { return domain::lowercase(s); }

// Five response counts whose mean sits near quality.
std::array<std::int64_t, 5> responses(std::mt19937& rng, double quality, int students) {
  std::normal_distribution<double> noise(quality, 0.8);
  std::array<std::int64_t, 5> counts{};
  for (int s = 0; s < students; ++s) {
    auto k = static_cast<int>(std::lround(noise(rng)));
    counts[static_cast<std::size_t>(std::clamp(k, 1, 5) - 1)] += 1;
  }
  return counts;
}

}  // namespace

SeedResult seed_department(domain::Store& store, authz::AuthService& auth,
                           const SeedOptions& options) {
  using namespace std::chrono;
  std::mt19937 rng(options.seed);
  SeedResult out;
  out.department_id = store.create_department(options.department);

  auto tag = std::to_string(options.seed);
  out.chair = {"", "chair" + tag + "@" + options.email_domain, "Dana Chair", options.chair_password};
  out.chair.user_id =
      auth.bootstrap_chair(out.department_id,
                           {out.chair.email, "Dana", "Chair", domain::Role::chair},
                           options.chair_password)
          .id;
  auto chair = auth.authenticate(auth.login(out.chair.email, options.chair_password).id);

  for (int i = 0; i < options.faculty; ++i) {
    std::string first = kFirstNames[static_cast<std::size_t>(i) % kFirstNames.size()];
    std::string last = kLastNames[static_cast<std::size_t>(i * 5 + 3) % kLastNames.size()];
    if (i >= static_cast<int>(kFirstNames.size())) last += std::to_string(i);
    SeedAccount acct{"", lower_ascii(first + "." + last) + tag + "@" + options.email_domain,
                     first + " " + last, options.faculty_password};
    acct.user_id = auth.create_user(chair, {acct.email, first, last}, authz::CreationMode::manual,
                                    options.faculty_password)
                       .account.id;
    out.faculty.push_back(std::move(acct));
  }
  auth.logout(chair.session.id);

  // Evaluations.
  std::vector<std::pair<std::string, domain::EvaluationRecord>> rows;
  std::uniform_real_distribution<double> quality_dist(2.8, 4.7);
  std::uniform_int_distribution<int> students(8, 40);
  for (std::size_t f = 0; f < out.faculty.size(); ++f) {
    double quality = quality_dist(rng);
    std::vector<std::string> taught{options.courses.front()};
    if (options.courses.size() > 1) {
      taught.push_back(options.courses[1 + f % (options.courses.size() - 1)]);
    }
    for (const auto& course : taught) {
      auto dash = course.find('-');
      for (int year = options.first_year; year <= options.last_year; ++year) {
        auto term = rng() % 2 ? domain::Term::fall : domain::Term::spring;
        char section[8];
        std::snprintf(section, sizeof section, "%03zu", f + 1);
        int n = students(rng);
        for (auto cat : {domain::QuestionCategory::course, domain::QuestionCategory::instructor}) {
          for (int q = 1; q <= options.questions_per_category; ++q) {
            domain::EvaluationRecord r;
            r.course_key = {course.substr(0, dash), course.substr(dash + 1), section, term, year};
            bool is_course = cat == domain::QuestionCategory::course;
            r.question_id = (is_course ? "C" : "I") + std::to_string(q);
            r.question_text = is_course ? "Course question " + std::to_string(q)
                                        : "Instructor question " + std::to_string(q);
            r.category = cat;
            r.responses = responses(rng, quality, n);
            r.enrollment = n + static_cast<int>(rng() % 10);
            rows.emplace_back(out.faculty[f].email, std::move(r));
          }
        }
      }
    }
  }
  out.evaluations = ingest::evaluation_table(rows);

  if (options.research) {
    for (const auto& member : out.faculty) {
      for (int year = options.first_year; year <= options.last_year; ++year) {
        if (rng() % 2) {
          domain::Grant g{"Grant " + std::to_string(year) + " for " + member.name,
                          kAgencies[rng() % kAgencies.size()],
                          domain::Cents{static_cast<std::int64_t>(rng() % 50'000'000) + 100'000},
                          std::chrono::year{year} / 9 / 1, std::chrono::year{year + 2} / 8 / 31};
          store.put_research_item({"", member.user_id, g});
          ++out.research_items;
        }
        for (auto p = rng() % 3; p > 0; --p) {
          domain::Publication pub{"On topic " + std::to_string(rng() % 1000),
                                  kVenues[rng() % kVenues.size()], year, member.name};
          store.put_research_item({"", member.user_id, pub});
          ++out.research_items;
        }
        domain::Expenditure e{"Lab equipment " + std::to_string(year),
                              domain::Cents{static_cast<std::int64_t>(rng() % 2'000'000)}, year};
        store.put_research_item({"", member.user_id, e});
        ++out.research_items;
      }
    }
  }
  return out;
}

}  // namespace facdash::api
