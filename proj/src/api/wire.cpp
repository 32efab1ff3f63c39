#include "wire.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>

namespace facdash::api::wire {

using namespace domain;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::bad_request, what); }

std::optional<int> whole(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// "Fall-2023" or "2023"; a bare year means its first or last term.
TermRef window_end(std::string_view s, bool is_start) {
  if (auto year = whole(s)) {
    if (*year < kMinYear || *year > kMaxYear) bad("window year out of range");
    return {is_start ? Term::spring : Term::fall, *year};
  }
  return parse_term_ref(s);
}

}  // namespace

TermRef parse_term_ref(std::string_view text) {
  auto dash = text.find('-');
  if (dash == std::string_view::npos) bad("expected Term-YYYY, got '" + std::string(text) + "'");
  auto term = parse_term(text.substr(0, dash));
  auto year = whole(text.substr(dash + 1));
  if (!term || !year || *year < kMinYear || *year > kMaxYear) {
    bad("expected Term-YYYY, got '" + std::string(text) + "'");
  }
  return {*term, *year};
}

TermWindow parse_window(std::string_view text) {
  if (text.empty()) return TermWindow::all_time();
  auto sep = text.find("..");
  TermWindow w;
  if (sep == std::string_view::npos) {
    w = {window_end(text, true), window_end(text, false)};
  } else {
    w = {window_end(text.substr(0, sep), true), window_end(text.substr(sep + 2), false)};
  }
  if (w.empty()) bad("window ends before it starts");
  return w;
}

std::string format_window(const TermWindow& w) {
  auto one = [](TermRef t) { return std::string(to_string(t.term)) + "-" + std::to_string(t.year); };
  return one(w.first) + ".." + one(w.last);
}

CourseId parse_course(std::string_view text) {
  std::size_t i = 0;
  std::string prefix;
  while (i < text.size() && std::isalpha(static_cast<unsigned char>(text[i]))) {
    prefix += static_cast<char>(std::toupper(static_cast<unsigned char>(text[i++])));
  }
  if (i < text.size() && (text[i] == '-' || text[i] == ' ')) ++i;
  std::string number(text.substr(i));
  if (prefix.empty() || prefix.size() > 8 || number.empty() || number.size() > 16 ||
      !std::all_of(number.begin(), number.end(),
                   [](char c) { return std::isalnum(static_cast<unsigned char>(c)); })) {
    bad("expected a course like CSCE-145, got '" + std::string(text) + "'");
  }
  return {prefix, number};
}

Page parse_page(const ApiRequest& req) {
  Page p;
  if (auto v = req.param("limit")) {
    auto n = whole(*v);
    if (!n || *n < 1 || *n > kMaxLimit) bad("limit must be between 1 and 500");
    p.limit = static_cast<std::size_t>(*n);
  }
  if (auto v = req.param("offset")) {
    auto n = whole(*v);
    if (!n || *n < 0) bad("offset must be a non-negative integer");
    p.offset = static_cast<std::size_t>(*n);
  }
  return p;
}

json parse_body(const ApiRequest& req) {
  auto type = req.header("content-type").value_or("");
  if (type.rfind("application/json", 0) != 0) {
    throw Error(ErrorCode::unsupported_media_type, "expected an application/json body");
  }
  auto body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) bad("body is not a JSON object");
  return body;
}

std::optional<std::string> string_field(const json& body, const char* name) {
  auto it = body.find(name);
  if (it == body.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw Error(ErrorCode::field_errors, "the submitted form has errors",
                {{name, "must be a string"}});
  }
  return it->get<std::string>();
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  auto day = floor<days>(t);
  hh_mm_ss tod{t - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02dZ", format_date(year_month_day{day}).c_str(),
                static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                static_cast<int>(tod.seconds().count()));
  return buf;
}

json rating(std::optional<double> v) {
  if (!v) return nullptr;
  return analytics::round_to(*v, 4);
}

json to_json(const UserAccount& u) {
  return {{"id", u.id},
          {"email", u.email},
          {"first_name", u.first_name},
          {"last_name", u.last_name},
          {"name", u.display_name()},
          {"role", to_string(u.role)},
          {"department_id", u.department_id},
          {"pending", u.pending()},
          {"has_photo", u.has_profile_image}};
}

json to_json(const CourseKey& k) {
  return {{"prefix", k.prefix},
          {"number", k.number},
          {"section", k.section},
          {"term", to_string(k.term)},
          {"year", k.year}};
}

json to_json(const analytics::SectionAverages& s) {
  return {{"course", s.course_key.course().display()},
          {"course_key", to_json(s.course_key)},
          {"instructor_id", s.instructor_id},
          {"avg_course_rating", rating(s.avg_course_rating)},
          {"avg_instructor_rating", rating(s.avg_instructor_rating)}};
}

json to_json(const analytics::QuestionStats& q) {
  return {{"question_id", q.question_id},
          {"question_text", q.question_text},
          {"category", to_string(q.category)},
          {"mean", rating(q.mean)},
          {"histogram", q.histogram},
          {"respondents", q.respondents}};
}

json to_json(const analytics::DistributionCurve& c) {
  json highlight = nullptr;
  if (c.highlight) highlight = {{"value", analytics::round_to(*c.highlight, 4)}};
  return {{"grid", c.grid},
          {"density", c.density},
          {"bandwidth", c.bandwidth},
          {"cohort_n", c.cohort_n},
          {"highlight", highlight}};
}

json to_json(const ResearchItem& item) {
  json out = {{"id", item.item_id},
              {"owner_id", item.owner_id},
              {"kind", to_string(item.kind())},
              {"year", item.year()}};
  std::visit(
      [&](const auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, Grant>) {
          out["title"] = body.title;
          out["funding_agency"] = body.funding_agency;
          out["amount"] = format_cents(body.amount);
          out["start_date"] = format_date(body.start_date);
          out["end_date"] = format_date(body.end_date);
        } else if constexpr (std::is_same_v<T, Publication>) {
          out["title"] = body.title;
          out["venue"] = body.venue;
          out["publication_year"] = body.publication_year;
          out["author_list"] = body.author_list;
        } else {
          out["description"] = body.description;
          out["amount"] = format_cents(body.amount);
          out["fiscal_year"] = body.fiscal_year;
        }
      },
      item.body);
  return out;
}

json to_json(const DeletionReport& r) {
  return {{"grants", r.grants},
          {"publications", r.publications},
          {"expenditures", r.expenditures},
          {"invite_tokens", r.invite_tokens},
          {"sessions", r.sessions},
          {"profile_images", r.profile_images},
          {"evaluations_tombstoned", r.evaluations_tombstoned}};
}

json to_json(const analytics::TeamSummaryRow& r) {
  return {{"member", {{"user_id", r.user_id}, {"name", r.name}}},
          {"teaching",
           {{"courses_taught", r.courses_taught},
            {"overall_avg_instructor_rating", rating(r.overall_avg_instructor_rating)},
            {"percentile", r.percentile ? json(*r.percentile) : json(nullptr)}}},
          {"research",
           {{"grant_total", format_cents(r.grant_total)},
            {"publication_count", r.publication_count},
            {"expenditure_total", format_cents(r.expenditure_total)}}}};
}

json to_json(const analytics::DashboardSummary& d) {
  json recent = json::array();
  for (const auto& s : d.recent_evals) recent.push_back(to_json(s));
  const auto& t = d.research_totals;
  return {{"recent_evals", recent},
          {"research_totals",
           {{"year", d.year},
            {"grants", {{"count", t.grant_count}, {"total", format_cents(t.grant_total)}}},
            {"publications", {{"count", t.publication_count}}},
            {"expenditures",
             {{"count", t.expenditure_count}, {"total", format_cents(t.expenditure_total)}}}}},
          {"pending_actions", d.pending_actions}};
}

json to_json(const ingest::ParseReport& r) {
  json rejected = json::array();
  for (const auto& x : r.rejected) {
    rejected.push_back({{"row", x.row_number}, {"field", x.field}, {"message", x.message}});
  }
  return {{"rows_read", r.totals.rows_read},
          {"accepted", r.totals.accepted},
          {"rejected", r.totals.rejected},
          {"rejections", rejected}};
}

json to_json(const UpsertSummary& s) {
  return {{"inserted", s.inserted}, {"replaced", s.replaced}};
}

json error_body(int status, ErrorCode code, std::string_view message,
                const std::vector<FieldError>& fields) {
  json out = {{"status", status}, {"code", to_string(code)}, {"message", message}};
  if (!fields.empty()) {
    json list = json::array();
    for (const auto& f : fields) list.push_back({{"field", f.field}, {"message", f.message}});
    out["fields"] = list;
  }
  return out;
}

ApiResponse json_response(int status, const json& body) {
  ApiResponse r;
  r.status = status;
  r.body = body.dump(-1, ' ', false, json::error_handler_t::replace);
  return r;
}

}  // namespace facdash::api::wire
