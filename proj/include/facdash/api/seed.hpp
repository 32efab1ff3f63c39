#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "facdash/authz/auth_service.hpp"
#include "facdash/ingest/table.hpp"

namespace facdash::api {

struct SeedOptions {
  std::string department = "Computer Science";
  int faculty = 6;
  std::uint32_t seed = 1;
  int first_year = 2021;
  int last_year = 2023;
  // Every member teaches the first course; each also teaches one other.
  std::vector<std::string> courses = {"CSCE-145", "CSCE-146", "CSCE-240", "CSCE-350"};
  int questions_per_category = 2;
  std::string email_domain = "example.edu";
  std::string chair_password = "demo-chair-password";
  std::string faculty_password = "demo-faculty-password";
  bool research = true;
};

struct SeedAccount {
  std::string user_id;
  std::string email;
  std::string name;
  std::string password;
};

struct SeedResult {
  std::string department_id;
  SeedAccount chair;
  std::vector<SeedAccount> faculty;
  // Evaluation upload sheet for the department, not yet committed.
  ingest::Table evaluations;
  std::int64_t research_items = 0;
};

// Creates a demo department: one chair, N faculty with passwords set, and
// synthetic research items. Deterministic for a given seed.
SeedResult seed_department(domain::Store& store, authz::AuthService& auth,
                           const SeedOptions& options);

}  // namespace facdash::api
