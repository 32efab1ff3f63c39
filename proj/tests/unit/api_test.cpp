#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "facdash/api/app.hpp"
#include "facdash/api/seed.hpp"
#include "facdash/ingest/workbook.hpp"
#include "support/api_client.hpp"

namespace facdash::api {
namespace {

using testing::ApiClient;
using json = nlohmann::json;

class ApiTest : public ::testing::Test {
 protected:
  void SetUp() override {
    Config config;
    config.db_url = "sqlite::memory:";
    config.base_url = "https://dash.example.edu";
    config.max_upload_bytes = 65536;
    app = App::create(config, {clock, mail, authz::HashCost::minimal()});
    SeedOptions opts;
    opts.faculty = 5;
    opts.research = false;
    seed = seed_department(*app->store, *app->auth, opts);
  }

  ApiClient as_chair() {
    ApiClient c(*app->api);
    EXPECT_EQ(c.login(seed.chair.email, seed.chair.password).status, 200);
    return c;
  }
  ApiClient as_faculty(std::size_t i = 0) {
    ApiClient c(*app->api);
    EXPECT_EQ(c.login(seed.faculty[i].email, seed.faculty[i].password).status, 200);
    return c;
  }

  std::shared_ptr<ManualClock> clock = std::make_shared<ManualClock>();
  std::shared_ptr<authz::MemoryMailSink> mail = std::make_shared<authz::MemoryMailSink>();
  std::unique_ptr<App> app;
  SeedResult seed;
};

MultipartPart workbook_part(const ingest::Table& t) {
  return {"file", "evals.csv", "text/csv", ingest::write_csv(t)};
}

TEST_F(ApiTest, BasicStatuses) {
  ApiClient anon(*app->api);
  auto r = anon.call("GET", "/api/evals");
  EXPECT_EQ(r.status, 401);
  EXPECT_EQ(r.code(), "not-authenticated");
  EXPECT_EQ(r.body()["status"], 401);
  EXPECT_EQ(anon.call("GET", "/api/nonexistent").status, 404);
  EXPECT_EQ(anon.call("GET", "/elsewhere").status, 404);
  EXPECT_EQ(anon.call("PUT", "/api/evals").status, 405);

  auto fac = as_faculty();
  auto up = fac.upload("/api/evals/upload", {workbook_part(seed.evaluations)});
  EXPECT_EQ(up.status, 403);
  EXPECT_EQ(up.code(), "wrong-role");
}

TEST_F(ApiTest, LoginSetsHardenedCookie) {
  ApiClient c(*app->api);
  auto r = c.login(seed.chair.email, seed.chair.password);
  ASSERT_EQ(r.status, 200);
  std::string cookie;
  for (const auto& [k, v] : r.headers) {
    if (k == "Set-Cookie") cookie = v;
  }
  EXPECT_NE(cookie.find("HttpOnly"), std::string::npos);
  EXPECT_NE(cookie.find("SameSite=Strict"), std::string::npos);
  EXPECT_NE(cookie.find("Secure"), std::string::npos);
  EXPECT_EQ(r.body()["user"]["role"], "chair");
  EXPECT_FALSE(r.body()["user"].contains("password_hash"));
  EXPECT_EQ(r.raw.find(c.session()), std::string::npos);

  ApiClient bad(*app->api);
  auto wrong = bad.login(seed.chair.email, "not-the-password");
  auto unknown = bad.login("nobody@example.edu", "not-the-password");
  EXPECT_EQ(wrong.status, 401);
  EXPECT_EQ(wrong.raw, unknown.raw);

  EXPECT_EQ(c.call("DELETE", "/api/session").status, 204);
  EXPECT_EQ(c.call("GET", "/api/me").status, 401);
}

TEST_F(ApiTest, MutationsNeedCsrfToken) {
  auto c = as_faculty();
  c.set_csrf("forged");
  auto r = c.call("POST", "/api/publications",
                  {{"title", "T"}, {"venue", "V"}, {"publication_year", 2022}, {"author_list", "A"}});
  EXPECT_EQ(r.status, 403);
  EXPECT_EQ(r.code(), "csrf-mismatch");
  // Reads do not.
  EXPECT_EQ(c.call("GET", "/api/me").status, 200);
}

TEST_F(ApiTest, SessionExpires) {
  auto c = as_faculty();
  clock->advance(std::chrono::hours{25});
  EXPECT_EQ(c.call("GET", "/api/dashboard").status, 401);
}

TEST_F(ApiTest, UploadThenBrowse) {
  auto chair = as_chair();
  auto dry = chair.upload("/api/evals/upload", {workbook_part(seed.evaluations)},
                          {{"dry_run", "true"}});
  ASSERT_EQ(dry.status, 200) << dry.raw;
  EXPECT_FALSE(dry.body()["committed"]);
  EXPECT_TRUE(app->store->query_evaluations({}).empty());

  auto rows = seed.evaluations.size() - 1;
  auto up = chair.upload("/api/evals/upload", {workbook_part(seed.evaluations)});
  ASSERT_EQ(up.status, 200) << up.raw;
  EXPECT_EQ(up.body()["report"]["accepted"], rows);
  EXPECT_EQ(up.body()["upsert"]["inserted"], rows);

  auto fac = as_faculty(1);
  auto evals = fac.call("GET", "/api/evals", nullptr, {{"window", "2021..2023"}, {"limit", "2"}});
  ASSERT_EQ(evals.status, 200);
  auto b = evals.body();
  EXPECT_EQ(b["items"].size(), 2u);
  EXPECT_EQ(b["total"], 6);  // two courses, three years
  EXPECT_EQ(b["subject_id"], seed.faculty[1].user_id);

  auto first = b["items"][0];
  auto course = first["course_key"]["prefix"].get<std::string>() + "-" +
                first["course_key"]["number"].get<std::string>();
  auto term = first["course_key"]["term"].get<std::string>() + "-" +
              std::to_string(first["course_key"]["year"].get<int>());
  auto q = fac.call("GET", "/api/evals/" + course + "/" +
                               first["course_key"]["section"].get<std::string>() + "/questions",
                    nullptr, {{"term", term}});
  ASSERT_EQ(q.status, 200) << q.raw;
  EXPECT_EQ(q.body()["questions"].size(), 4u);

  auto dist = fac.call("GET", "/api/analytics/course", nullptr,
                       {{"course", "CSCE-145"}, {"metric", "instructor"}});
  ASSERT_EQ(dist.status, 200) << dist.raw;
  EXPECT_EQ(dist.body()["curve"]["grid"].size(), 201u);
  EXPECT_EQ(dist.body()["curve"]["cohort_n"], 5);
  for (std::size_t i = 0; i < seed.faculty.size(); ++i) {
    if (i == 1) continue;
    EXPECT_EQ(dist.raw.find(seed.faculty[i].user_id), std::string::npos);
    EXPECT_EQ(dist.raw.find(seed.faculty[i].email), std::string::npos);
  }

  auto peek = fac.call("GET", "/api/analytics/course", nullptr,
                       {{"course", "CSCE-145"}, {"subject", seed.faculty[0].user_id}});
  EXPECT_EQ(peek.code(), "wrong-role");
  auto small = fac.call("GET", "/api/analytics/course", nullptr, {{"course", "CSCE-146"}});
  EXPECT_EQ(small.status, 422);
  EXPECT_EQ(small.code(), "insufficient-cohort");
}

TEST_F(ApiTest, UploadValidation) {
  auto chair = as_chair();
  api::ApiRequest raw;
  raw.method = "POST";
  raw.path = "/api/evals/upload";
  raw.headers["content-type"] = "text/csv";
  raw.body = ingest::write_csv(seed.evaluations);
  auto wrong_type = chair.send(raw);
  EXPECT_EQ(wrong_type.status, 422);
  EXPECT_EQ(wrong_type.code(), "unsupported-media-type");

  auto big = chair.upload("/api/evals/upload", {{"file", "x.csv", "text/csv", std::string(70000, 'a')}});
  EXPECT_EQ(big.status, 413);

  auto junk = chair.upload("/api/evals/upload", {{"file", "x.xlsx", "", "not a zip"}});
  EXPECT_EQ(junk.code(), "unreadable-payload");

  ingest::Table header_only{seed.evaluations.front()};
  header_only.push_back(seed.evaluations[1]);
  header_only[1][11] = "-1";
  auto none = chair.upload("/api/evals/upload", {workbook_part(header_only)});
  EXPECT_EQ(none.status, 422);
  EXPECT_EQ(none.code(), "empty-batch");
  EXPECT_EQ(none.body()["fields"][0]["field"], "row 1: n3");

  auto unknown = chair.upload("/api/evals/upload", {{"file", "x.bin", "", "a,b"}});
  EXPECT_EQ(unknown.code(), "unsupported-media-type");
}

TEST_F(ApiTest, ResearchFormsAndFilters) {
  auto fac = as_faculty();
  auto g = fac.call("POST", "/api/grants",
                    {{"title", "Quantum Widgets"},
                     {"funding_agency", "NSF"},
                     {"amount", "125000.50"},
                     {"start_date", "2024-01-01"},
                     {"end_date", "2025-12-31"}});
  ASSERT_EQ(g.status, 201) << g.raw;
  EXPECT_EQ(g.body()["amount"], "125000.50");
  EXPECT_EQ(g.body()["owner_id"], seed.faculty[0].user_id);

  auto bad = fac.call("POST", "/api/grants",
                      {{"title", "X"},
                       {"funding_agency", "NSF"},
                       {"amount", "1"},
                       {"start_date", "2024-06-01"},
                       {"end_date", "2024-05-01"}});
  EXPECT_EQ(bad.status, 422);
  EXPECT_EQ(bad.body()["fields"][0]["field"], "end_date");

  fac.call("POST", "/api/grants",
           {{"title", "Other"},
            {"funding_agency", "DOE"},
            {"amount", 10},
            {"start_date", "2023-01-01"},
            {"end_date", "2023-12-31"}});
  auto all = fac.call("GET", "/api/grants");
  EXPECT_EQ(all.body()["total"], 2);
  EXPECT_EQ(all.body()["items"][0]["title"], "Quantum Widgets");
  auto filtered = fac.call("GET", "/api/grants", nullptr, {{"q", "quantum"}});
  EXPECT_EQ(filtered.body()["total"], 1);
  auto windowed = fac.call("GET", "/api/grants", nullptr, {{"window", "2023"}});
  EXPECT_EQ(windowed.body()["total"], 1);

  auto peer = as_faculty(1);
  EXPECT_EQ(peer.call("GET", "/api/grants", nullptr, {{"subject", seed.faculty[0].user_id}}).code(),
            "out-of-scope");
  auto chair = as_chair();
  EXPECT_EQ(chair.call("GET", "/api/grants", nullptr, {{"subject", seed.faculty[0].user_id}})
                .body()["total"],
            2);

  auto text = fac.send([&] {
    api::ApiRequest r;
    r.method = "POST";
    r.path = "/api/expenditures";
    r.headers["content-type"] = "text/plain";
    r.body = "description=x";
    return r;
  }());
  EXPECT_EQ(text.code(), "unsupported-media-type");
  auto malformed = fac.send([&] {
    api::ApiRequest r;
    r.method = "POST";
    r.path = "/api/expenditures";
    r.headers["content-type"] = "application/json";
    r.body = "{not json";
    return r;
  }());
  EXPECT_EQ(malformed.status, 400);
}

TEST_F(ApiTest, Pagination) {
  auto chair = as_chair();
  EXPECT_EQ(chair.call("GET", "/api/users").body()["total"], 6);
  EXPECT_EQ(chair.call("GET", "/api/users").body()["limit"], 50);
  auto page = chair.call("GET", "/api/users", nullptr, {{"limit", "4"}, {"offset", "4"}});
  EXPECT_EQ(page.body()["items"].size(), 2u);
  EXPECT_EQ(chair.call("GET", "/api/users", nullptr, {{"limit", "501"}}).status, 400);
  EXPECT_EQ(chair.call("GET", "/api/users", nullptr, {{"limit", "0"}}).status, 400);
  EXPECT_EQ(chair.call("GET", "/api/users", nullptr, {{"offset", "-1"}}).status, 400);
  EXPECT_EQ(chair.call("GET", "/api/users", nullptr, {{"limit", "500"}}).status, 200);
}

TEST_F(ApiTest, UserAdministrationAndInvites) {
  auto chair = as_chair();
  auto created = chair.call("POST", "/api/users",
                            {{"email", "Newbie@Example.edu"},
                             {"first_name", "New"},
                             {"last_name", "Bie"}});
  ASSERT_EQ(created.status, 201) << created.raw;
  EXPECT_TRUE(created.body()["user"]["pending"]);
  auto id = created.body()["user"]["id"].get<std::string>();

  auto messages = mail->messages();
  ASSERT_EQ(messages.size(), 1u);
  const std::string prefix = "https://dash.example.edu/set-password?token=";
  auto at = messages[0].body.find(prefix);
  ASSERT_NE(at, std::string::npos);
  auto token = messages[0].body.substr(at + prefix.size(), 43);
  EXPECT_EQ(created.raw.find(token), std::string::npos);

  EXPECT_EQ(chair.call("POST", "/api/users",
                       {{"email", "newbie@example.edu"}, {"first_name", "A"}, {"last_name", "B"}})
                .status,
            409);

  ApiClient anon(*app->api);
  auto weak = anon.call("POST", "/api/invites/" + token + "/redeem", {{"password", "short"}});
  EXPECT_EQ(weak.code(), "weak-password");
  auto ok = anon.call("POST", "/api/invites/" + token + "/redeem",
                      {{"password", "a-long-enough-password"}});
  ASSERT_EQ(ok.status, 200) << ok.raw;
  EXPECT_FALSE(ok.body()["user"]["pending"]);
  auto again = anon.call("POST", "/api/invites/" + token + "/redeem",
                         {{"password", "a-long-enough-password"}});
  EXPECT_EQ(again.code(), "invalid-token");
  EXPECT_EQ(anon.login("newbie@example.edu", "a-long-enough-password").status, 200);

  auto patched = chair.call("PATCH", "/api/users/" + id, {{"first_name", "Renamed"}});
  EXPECT_EQ(patched.body()["user"]["first_name"], "Renamed");
  EXPECT_EQ(chair.call("PATCH", "/api/users/usr_missing", {{"first_name", "X"}}).status, 404);
  auto del = chair.call("DELETE", "/api/users/" + id);
  EXPECT_EQ(del.status, 200);
  EXPECT_EQ(del.body()["sessions"], 1);
  EXPECT_EQ(anon.call("GET", "/api/me").status, 401);

  auto manual = chair.call("POST", "/api/users",
                           {{"email", "m@example.edu"},
                            {"first_name", "M"},
                            {"last_name", "N"},
                            {"mode", "manual"},
                            {"password", "manual-password-1"}});
  EXPECT_EQ(manual.status, 201);
  EXPECT_TRUE(manual.body()["invite"].is_null());
  auto missing = chair.call("POST", "/api/users", {{"email", "z@example.edu"}});
  EXPECT_EQ(missing.code(), "field-errors");
}

TEST_F(ApiTest, AccountSettings) {
  auto fac = as_faculty();
  auto other = as_faculty();  // second session for the same account
  EXPECT_EQ(fac.call("PATCH", "/api/me/password",
                     {{"old_password", "wrong-password"}, {"new_password", "brand-new-password"}})
                .status,
            401);
  EXPECT_EQ(fac.call("PATCH", "/api/me/password",
                     {{"old_password", seed.faculty[0].password},
                      {"new_password", "brand-new-password"}})
                .status,
            204);
  EXPECT_EQ(fac.call("GET", "/api/me").status, 200);
  EXPECT_EQ(other.call("GET", "/api/me").status, 401);

  EXPECT_EQ(fac.call("GET", "/api/me/photo").status, 404);
  std::string png = "\x89PNG\r\n\x1a\n" + std::string(16, '\0');
  EXPECT_EQ(fac.upload("/api/me/photo", {{"photo", "me.png", "image/png", png}}).status, 204);
  auto photo = fac.call("GET", "/api/me/photo");
  EXPECT_EQ(photo.content_type, "image/png");
  EXPECT_EQ(photo.raw, png);
  EXPECT_EQ(fac.upload("/api/me/photo", {{"photo", "me.txt", "text/plain", "hello"}}).code(),
            "unsupported-media-type");
  EXPECT_EQ(fac.upload("/api/me/photo", {{"photo", "big.png", "image/png", png + std::string(70000, 'x')}})
                .status,
            413);

  auto gone = fac.call("DELETE", "/api/me/data");
  EXPECT_EQ(gone.status, 200);
  EXPECT_EQ(gone.body()["profile_images"], 1);
  EXPECT_EQ(fac.call("GET", "/api/me").status, 401);
}

TEST_F(ApiTest, TeamAndDashboard) {
  auto chair = as_chair();
  chair.upload("/api/evals/upload", {workbook_part(seed.evaluations)});
  auto team = chair.call("GET", "/api/team", nullptr, {{"name_q", seed.faculty[2].name.substr(0, 3)}});
  ASSERT_EQ(team.status, 200);
  ASSERT_GE(team.body()["items"].size(), 1u);
  EXPECT_FALSE(team.body()["items"][0]["teaching"]["percentile"].is_null());
  EXPECT_EQ(as_faculty().call("GET", "/api/team").code(), "wrong-role");

  auto dash = as_faculty(3).call("GET", "/api/dashboard");
  ASSERT_EQ(dash.status, 200);
  EXPECT_EQ(dash.body()["recent_evals"].size(), 4u);
  EXPECT_EQ(dash.body()["research_totals"]["grants"]["total"], "0.00");
}

TEST(ConfigTest, EnvironmentDefaultsAndOverrides) {
  auto none = Config::from_env([](const std::string&) { return std::nullopt; });
  EXPECT_EQ(none.cohort_min, 4);
  EXPECT_EQ(none.max_upload_bytes, 10 * 1024 * 1024);
  std::map<std::string, std::string> env{{"BASE_URL", "https://x.edu/"},
                                         {"DB_URL", "sqlite::memory:"},
                                         {"SMTP_URL", "smtp://mail:25"},
                                         {"COHORT_MIN", "6"},
                                         {"MAX_UPLOAD_BYTES", "2048"}};
  auto c = Config::from_env([&](const std::string& k) -> std::optional<std::string> {
    if (auto it = env.find(k); it != env.end()) return it->second;
    return std::nullopt;
  });
  EXPECT_EQ(c.base_url, "https://x.edu");
  EXPECT_EQ(c.db_url, "sqlite::memory:");
  EXPECT_EQ(c.smtp_url, "smtp://mail:25");
  EXPECT_EQ(c.cohort_min, 6);
  EXPECT_EQ(c.max_upload_bytes, 2048);
  env["COHORT_MIN"] = "four";
  EXPECT_THROW(Config::from_env([&](const std::string& k) -> std::optional<std::string> {
                 if (auto it = env.find(k); it != env.end()) return it->second;
                 return std::nullopt;
               }),
               Error);
}

TEST(RoutesTest, TableIsConsistent) {
  std::set<std::pair<std::string_view, std::string_view>> seen;
  for (const auto& r : routes()) {
    EXPECT_TRUE(seen.emplace(r.method, r.pattern).second) << r.pattern;
    bool mutating = r.method != "GET";
    if (r.authenticated) EXPECT_EQ(r.csrf, mutating) << r.method << " " << r.pattern;
  }
}

}  // namespace
}  // namespace facdash::api

namespace facdash::api {
namespace {

TEST(ContractTest, DescriptionFileMatchesRouteTable) {
  std::ifstream in(FACDASH_OPENAPI_FILE);
  ASSERT_TRUE(in) << FACDASH_OPENAPI_FILE;
  auto doc = nlohmann::json::parse(in);
  std::set<std::pair<std::string, std::string>> documented, served;
  for (const auto& [path, ops] : doc["paths"].items()) {
    for (const auto& [method, op] : ops.items()) {
      std::string upper;
      for (char c : method) upper += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      documented.emplace(upper, path);
      ASSERT_TRUE(op.contains("x-access")) << method << " " << path;
      ASSERT_TRUE(op.contains("responses"));
    }
  }
  for (const auto& r : routes()) {
    std::string path = "/api" + std::string(r.pattern);
    served.emplace(std::string(r.method), path);
    std::string method;
    for (char c : r.method) method += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    const auto& op = doc["paths"][path][method];
    EXPECT_EQ(op["x-access"] == "anonymous", !r.authenticated) << path;
    EXPECT_EQ(op.value("x-csrf", false), r.csrf) << method << " " << path;
    if (r.authenticated) EXPECT_TRUE(op["responses"].contains("401")) << path;
  }
  EXPECT_EQ(documented, served);

  std::set<std::string> codes;
  for (const auto& c : doc["components"]["schemas"]["ApiError"]["properties"]["code"]["enum"]) {
    codes.insert(c.get<std::string>());
  }
  for (int c = 0; c <= static_cast<int>(ErrorCode::internal); ++c) {
    EXPECT_TRUE(codes.contains(std::string(to_string(static_cast<ErrorCode>(c)))));
  }
}

}  // namespace
}  // namespace facdash::api
