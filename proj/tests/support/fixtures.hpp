#pragma once

#include <memory>
#include <string>

#include "facdash/domain/store.hpp"
#include "facdash/domain/types.hpp"

namespace facdash::testing {

inline std::unique_ptr<domain::Store> memory_store() {
  return domain::Store::open("sqlite::memory:");
}

inline domain::UserAccount make_user(const std::string& department_id, const std::string& email,
                                     const std::string& first, const std::string& last,
                                     domain::Role role = domain::Role::faculty) {
  domain::UserAccount u;
  u.email = email;
  u.first_name = first;
  u.last_name = last;
  u.role = role;
  u.department_id = department_id;
  u.password_hash = "unused-hash";
  return u;
}

inline domain::Grant make_grant(std::string title, std::int64_t cents = 100000,
                                int start_year = 2024) {
  using namespace std::chrono;
  return domain::Grant{std::move(title), "NSF", domain::Cents{cents},
                       year{start_year} / January / 1, year{start_year + 1} / January / 1};
}

inline domain::EvaluationRecord make_eval(const std::string& instructor, std::string prefix,
                                          std::string number, std::string section,
                                          domain::Term term, int year, std::string question,
                                          domain::QuestionCategory category,
                                          std::array<std::int64_t, 5> counts) {
  domain::EvaluationRecord r;
  r.instructor_id = instructor;
  r.course_key = {std::move(prefix), std::move(number), std::move(section), term, year};
  r.question_id = question;
  r.question_text = "Question " + question;
  r.category = category;
  r.responses = counts;
  return r;
}

}  // namespace facdash::testing
