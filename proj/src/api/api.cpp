#include "facdash/api/api.hpp"

#include <array>

#include "facdash/ingest/research_form.hpp"
#include "facdash/ingest/workbook.hpp"
#include "wire.hpp"

namespace facdash::api {

using authz::Action;
using domain::ResearchKind;
using wire::json;

int status_of(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::not_authenticated:
    case ErrorCode::invalid_credentials: return 401;
    case ErrorCode::wrong_role:
    case ErrorCode::out_of_scope:
    case ErrorCode::account_pending:
    case ErrorCode::csrf_mismatch: return 403;
    case ErrorCode::not_found:
    case ErrorCode::unknown_user: return 404;
    case ErrorCode::method_not_allowed: return 405;
    case ErrorCode::duplicate_email: return 409;
    case ErrorCode::payload_too_large: return 413;
    case ErrorCode::bad_request: return 400;
    case ErrorCode::mail_failure: return 502;
    case ErrorCode::storage_failure:
    case ErrorCode::internal: return 500;
    case ErrorCode::invariant_violation:
    case ErrorCode::unknown_kind:
    case ErrorCode::weak_password:
    case ErrorCode::invalid_token:
    case ErrorCode::unreadable_payload:
    case ErrorCode::missing_header:
    case ErrorCode::empty_batch:
    case ErrorCode::field_errors:
    case ErrorCode::mixed_section:
    case ErrorCode::value_not_member:
    case ErrorCode::degenerate_sample:
    case ErrorCode::insufficient_cohort:
    case ErrorCode::unsupported_media_type: return 422;
  }
  return 500;
}

namespace {

constexpr std::array<RouteInfo, 24> kRoutes{{
    {"POST", "/session", false, false},
    {"DELETE", "/session", true, true},
    {"GET", "/me", true, false},
    {"PATCH", "/me/password", true, true},
    {"PUT", "/me/photo", true, true},
    {"GET", "/me/photo", true, false},
    {"DELETE", "/me/data", true, true},
    {"GET", "/dashboard", true, false},
    {"GET", "/evals", true, false},
    {"POST", "/evals/upload", true, true},
    {"GET", "/evals/{course}/{section}/questions", true, false},
    {"GET", "/analytics/course", true, false},
    {"GET", "/grants", true, false},
    {"POST", "/grants", true, true},
    {"GET", "/publications", true, false},
    {"POST", "/publications", true, true},
    {"GET", "/expenditures", true, false},
    {"POST", "/expenditures", true, true},
    {"GET", "/team", true, false},
    {"GET", "/users", true, false},
    {"POST", "/users", true, true},
    {"PATCH", "/users/{id}", true, true},
    {"DELETE", "/users/{id}", true, true},
    {"POST", "/invites/{token}/redeem", false, false},
}};

std::vector<std::string_view> segments(std::string_view path) {
  std::vector<std::string_view> out;
  while (!path.empty()) {
    auto slash = path.find('/');
    auto seg = path.substr(0, slash);
    if (!seg.empty()) out.push_back(seg);
    if (slash == std::string_view::npos) break;
    path.remove_prefix(slash + 1);
  }
  return out;
}

// Path parameters in order, or nullopt when the pattern does not match.
std::optional<std::vector<std::string>> match(std::string_view pattern,
                                              const std::vector<std::string_view>& path) {
  auto pat = segments(pattern);
  if (pat.size() != path.size()) return std::nullopt;
  std::vector<std::string> params;
  for (std::size_t i = 0; i < pat.size(); ++i) {
    if (pat[i].starts_with('{')) {
      params.emplace_back(path[i]);
    } else if (pat[i] != path[i]) {
      return std::nullopt;
    }
  }
  return params;
}

ApiResponse no_content() {
  ApiResponse r;
  r.status = 204;
  r.content_type.clear();
  return r;
}

std::string require_string(const json& body, const char* name) {
  auto v = wire::string_field(body, name);
  if (!v || v->empty()) {
    throw Error(ErrorCode::field_errors, "the submitted form has errors", {{name, "is required"}});
  }
  return *v;
}

std::string sniff_image(std::string_view bytes) {
  if (bytes.starts_with("\x89PNG\r\n\x1a\n")) return "image/png";
  if (bytes.starts_with("\xFF\xD8\xFF")) return "image/jpeg";
  if (bytes.starts_with("GIF87a") || bytes.starts_with("GIF89a")) return "image/gif";
  if (bytes.size() >= 12 && bytes.starts_with("RIFF") && bytes.substr(8, 4) == "WEBP") {
    return "image/webp";
  }
  return {};
}

std::optional<ingest::WorkbookFormat> upload_format(const ApiRequest& req,
                                                    const MultipartPart& file) {
  if (auto f = req.part("format")) return ingest::parse_workbook_format(f->content);
  auto lower = domain::lowercase(file.filename);
  if (lower.ends_with(".xlsx")) return ingest::WorkbookFormat::xlsx;
  if (lower.ends_with(".csv")) return ingest::WorkbookFormat::csv;
  auto type = domain::lowercase(file.content_type);
  if (type.find("spreadsheetml") != std::string::npos) return ingest::WorkbookFormat::xlsx;
  if (type.starts_with("text/csv")) return ingest::WorkbookFormat::csv;
  return std::nullopt;
}

}  // namespace

std::span<const RouteInfo> routes() noexcept { return kRoutes; }

struct Api::Context {
  const ApiRequest& req;
  std::vector<std::string> params;
  authz::Principal who;

  std::optional<std::string> subject() const {
    auto s = req.param("subject");
    if (s && s->empty()) return std::nullopt;
    return s;
  }
  domain::TermWindow window() const { return wire::parse_window(req.param("window").value_or("")); }
};

Api::Api(domain::Store& store, authz::AuthService& auth,
         const analytics::AnalyticsService& analytics, const Config& config)
    : store_(store), auth_(auth), analytics_(analytics), config_(config) {}

Api::Handler Api::handler_for(std::size_t i) {
  static constexpr std::array<Handler, kRoutes.size()> kHandlers{
      &Api::login,
      &Api::logout,
      &Api::me,
      &Api::change_password,
      &Api::put_photo,
      &Api::get_photo,
      &Api::delete_own_data,
      &Api::dashboard,
      &Api::list_evals,
      &Api::upload_evals,
      &Api::eval_questions,
      &Api::course_analytics,
      &Api::list_grants,
      &Api::post_grant,
      &Api::list_publications,
      &Api::post_publication,
      &Api::list_expenditures,
      &Api::post_expenditure,
      &Api::team,
      &Api::list_users,
      &Api::create_user,
      &Api::update_user,
      &Api::delete_user,
      &Api::redeem_invite,
  };
  return kHandlers[i];
}

ApiResponse Api::handle(const ApiRequest& request) const {
  try {
    return dispatch(request);
  } catch (const Error& e) {
    int status = status_of(e.code());
    return wire::json_response(status, wire::error_body(status, e.code(), e.what(), e.fields()));
  } catch (const json::exception&) {
    return wire::json_response(400, wire::error_body(400, ErrorCode::bad_request,
                                                     "request body has the wrong shape"));
  } catch (const std::exception&) {
    return wire::json_response(
        500, wire::error_body(500, ErrorCode::internal, "the server could not complete the request"));
  }
}

ApiResponse Api::dispatch(const ApiRequest& request) const {
  std::string_view path = request.path;
  if (!path.starts_with("/api/")) throw Error(ErrorCode::not_found, "no such endpoint");
  auto segs = segments(path.substr(4));

  bool path_known = false;
  for (std::size_t i = 0; i < kRoutes.size(); ++i) {
    const auto& route = kRoutes[i];
    auto params = match(route.pattern, segs);
    if (!params) continue;
    path_known = true;
    if (route.method != request.method) continue;

    Context ctx{request, std::move(*params), {}};
    if (route.authenticated) {
      auto sid = request.cookie(kSessionCookie);
      if (!sid || sid->empty()) throw Error(ErrorCode::not_authenticated, "sign in first");
      ctx.who = auth_.authenticate(*sid);
      if (route.csrf && request.header(kCsrfHeader) != ctx.who.session.csrf_token) {
        throw Error(ErrorCode::csrf_mismatch, "missing or stale CSRF token");
      }
    }
    return (this->*handler_for(i))(ctx);
  }
  if (path_known) throw Error(ErrorCode::method_not_allowed, "method not allowed on this endpoint");
  throw Error(ErrorCode::not_found, "no such endpoint");
}

namespace {

std::string session_cookie(const std::string& value, long long max_age, bool secure) {
  std::string c = std::string(kSessionCookie) + "=" + value +
                  "; Path=/; HttpOnly; SameSite=Strict; Max-Age=" + std::to_string(max_age);
  if (secure) c += "; Secure";
  return c;
}

}  // namespace

ApiResponse Api::login(Context& ctx) const {
  auto body = wire::parse_body(ctx.req);
  auto email = wire::string_field(body, "email").value_or("");
  auto password = wire::string_field(body, "password").value_or("");
  auto session = auth_.login(email, password);
  auto who = auth_.authenticate(session.id);
  auto r = wire::json_response(200, {{"user", wire::to_json(who.user)},
                                     {"csrf_token", session.csrf_token},
                                     {"expires_at", wire::format_timestamp(session.expires_at)}});
  auto ttl = (session.expires_at - session.created_at).count();
  r.headers.emplace_back("Set-Cookie",
                         session_cookie(session.id, ttl, config_.base_url.starts_with("https:")));
  return r;
}

ApiResponse Api::logout(Context& ctx) const {
  auth_.require(ctx.who, Action::end_session);
  auth_.logout(ctx.who.session.id);
  auto r = no_content();
  r.headers.emplace_back("Set-Cookie",
                         session_cookie("", 0, config_.base_url.starts_with("https:")));
  return r;
}

ApiResponse Api::me(Context& ctx) const {
  auth_.require(ctx.who, Action::view_profile);
  return wire::json_response(200, {{"user", wire::to_json(ctx.who.user)},
                                   {"csrf_token", ctx.who.session.csrf_token},
                                   {"expires_at",
                                    wire::format_timestamp(ctx.who.session.expires_at)}});
}

ApiResponse Api::change_password(Context& ctx) const {
  auth_.require(ctx.who, Action::change_password);
  auto body = wire::parse_body(ctx.req);
  auth_.change_password(ctx.who, wire::string_field(body, "old_password").value_or(""),
                        wire::string_field(body, "new_password").value_or(""));
  return no_content();
}

ApiResponse Api::put_photo(Context& ctx) const {
  auth_.require(ctx.who, Action::manage_photo);
  auto type = ctx.req.header("content-type").value_or("");
  if (!domain::lowercase(type).starts_with("multipart/form-data")) {
    throw Error(ErrorCode::unsupported_media_type, "upload the photo as multipart/form-data");
  }
  const auto* part = ctx.req.part("photo");
  if (!part) {
    throw Error(ErrorCode::field_errors, "the submitted form has errors",
                {{"photo", "is required"}});
  }
  if (static_cast<std::int64_t>(part->content.size()) > config_.max_upload_bytes) {
    throw Error(ErrorCode::payload_too_large, "the photo exceeds the upload limit");
  }
  auto sniffed = sniff_image(part->content);
  if (sniffed.empty()) {
    throw Error(ErrorCode::unsupported_media_type, "photo must be a PNG, JPEG, GIF or WebP image");
  }
  store_.set_profile_image(ctx.who.user.id, {sniffed, part->content});
  return no_content();
}

ApiResponse Api::get_photo(Context& ctx) const {
  auth_.require(ctx.who, Action::view_profile);
  auto image = store_.profile_image(ctx.who.user.id);
  if (!image) throw Error(ErrorCode::not_found, "no profile photo");
  ApiResponse r;
  r.content_type = image->content_type;
  r.body = std::move(image->bytes);
  return r;
}

ApiResponse Api::delete_own_data(Context& ctx) const {
  auto report = auth_.delete_own_account(ctx.who);
  auto r = wire::json_response(200, wire::to_json(report));
  r.headers.emplace_back("Set-Cookie",
                         session_cookie("", 0, config_.base_url.starts_with("https:")));
  return r;
}

ApiResponse Api::dashboard(Context& ctx) const {
  return wire::json_response(200, wire::to_json(analytics_.dashboard(ctx.who)));
}

ApiResponse Api::list_evals(Context& ctx) const {
  auto window = ctx.window();
  auto page = wire::parse_page(ctx.req);
  auto subject = ctx.subject();
  auto sections = analytics_.evaluations(ctx.who, subject, window);
  auto out = wire::paged(sections, page, [](const auto& s) { return wire::to_json(s); });
  out["subject_id"] = subject.value_or(ctx.who.user.id);
  out["window"] = wire::format_window(window);
  return wire::json_response(200, out);
}

ApiResponse Api::eval_questions(Context& ctx) const {
  auto course = wire::parse_course(ctx.params[0]);
  auto term = ctx.req.param("term");
  if (!term) throw Error(ErrorCode::bad_request, "term is required, e.g. term=Fall-2023");
  auto when = wire::parse_term_ref(*term);
  auto details = analytics_.question_details(ctx.who, ctx.subject(), course, ctx.params[1], when);
  json questions = json::array();
  for (const auto& q : details.questions) questions.push_back(wire::to_json(q));
  return wire::json_response(200,
                             {{"section", wire::to_json(details.section)}, {"questions", questions}});
}

ApiResponse Api::course_analytics(Context& ctx) const {
  // Authorize before validating parameters so denials do not depend on them.
  auth_.require(ctx.who, Action::view_course_analytics, ctx.subject());
  auto course_text = ctx.req.param("course");
  if (!course_text) throw Error(ErrorCode::bad_request, "course is required, e.g. course=CSCE-145");
  auto course = wire::parse_course(*course_text);
  auto metric = analytics::parse_metric(ctx.req.param("metric").value_or("course"));
  if (!metric) throw Error(ErrorCode::bad_request, "metric must be course or instructor");
  auto window = ctx.window();

  auto result = analytics_.course_distribution(ctx.who, course, window, *metric, ctx.subject());
  json sections = json::array();
  for (const auto& s : result.sections) sections.push_back(wire::to_json(s));
  return wire::json_response(200, {{"course", course.display()},
                                   {"metric", analytics::to_string(*metric)},
                                   {"window", wire::format_window(window)},
                                   {"subject_id", result.subject_id},
                                   {"sections", sections},
                                   {"curve", wire::to_json(result.curve)}});
}

ApiResponse Api::list_research(Context& ctx, ResearchKind kind) const {
  auto subject = ctx.subject();
  auth_.require(ctx.who, Action::view_research, subject);
  auto page = wire::parse_page(ctx.req);
  domain::ResearchScope scope;
  scope.owners = std::vector<std::string>{subject.value_or(ctx.who.user.id)};
  scope.text_query = ctx.req.param("q").value_or("");
  if (auto w = ctx.req.param("window")) scope.window = wire::parse_window(*w);
  auto items = store_.query_research(kind, scope);
  auto out = wire::paged(items, page, [](const auto& i) { return wire::to_json(i); });
  out["subject_id"] = subject.value_or(ctx.who.user.id);
  return wire::json_response(200, out);
}

ApiResponse Api::post_research(Context& ctx, ResearchKind kind) const {
  auth_.require(ctx.who, Action::report_research);
  auto body = wire::parse_body(ctx.req);
  ingest::FormFields fields;
  for (const auto& [key, value] : body.items()) {
    if (value.is_string()) {
      fields[key] = value.get<std::string>();
    } else if (value.is_number()) {
      fields[key] = value.dump();
    } else if (!value.is_null()) {
      throw Error(ErrorCode::field_errors, "the submitted form has errors",
                  {{key, "must be a string or number"}});
    }
  }
  auto item = ingest::validate_research_item(kind, fields);
  item.owner_id = ctx.who.user.id;
  item.item_id = store_.put_research_item(item);
  return wire::json_response(201, wire::to_json(item));
}

ApiResponse Api::list_grants(Context& ctx) const { return list_research(ctx, ResearchKind::grant); }
ApiResponse Api::list_publications(Context& ctx) const {
  return list_research(ctx, ResearchKind::publication);
}
ApiResponse Api::list_expenditures(Context& ctx) const {
  return list_research(ctx, ResearchKind::expenditure);
}
ApiResponse Api::post_grant(Context& ctx) const { return post_research(ctx, ResearchKind::grant); }
ApiResponse Api::post_publication(Context& ctx) const {
  return post_research(ctx, ResearchKind::publication);
}
ApiResponse Api::post_expenditure(Context& ctx) const {
  return post_research(ctx, ResearchKind::expenditure);
}

ApiResponse Api::team(Context& ctx) const {
  auth_.require(ctx.who, Action::view_team);
  auto window = ctx.window();
  auto page = wire::parse_page(ctx.req);
  analytics::TeamFilters filters{ctx.req.param("name_q").value_or(""),
                                 ctx.req.param("course_q").value_or("")};
  auto rows = analytics_.team_summary(ctx.who, window, filters);
  auto out = wire::paged(rows, page, [](const auto& r) { return wire::to_json(r); });
  out["window"] = wire::format_window(window);
  return wire::json_response(200, out);
}

ApiResponse Api::upload_evals(Context& ctx) const {
  auth_.require(ctx.who, Action::upload_evaluations);
  auto type = ctx.req.header("content-type").value_or("");
  if (!domain::lowercase(type).starts_with("multipart/form-data")) {
    throw Error(ErrorCode::unsupported_media_type, "upload the workbook as multipart/form-data");
  }
  const auto* file = ctx.req.part("file");
  if (!file) {
    throw Error(ErrorCode::field_errors, "the submitted form has errors", {{"file", "is required"}});
  }
  if (static_cast<std::int64_t>(file->content.size()) > config_.max_upload_bytes) {
    throw Error(ErrorCode::payload_too_large, "the workbook exceeds the upload limit");
  }
  auto format = upload_format(ctx.req, *file);
  if (!format) {
    throw Error(ErrorCode::unsupported_media_type, "workbook must be an .xlsx or .csv file");
  }

  auto report = ingest::parse_eval_workbook(
      file->content, *format, ingest::store_resolver(store_, ctx.who.user.department_id));
  bool dry_run = ctx.req.param("dry_run").value_or("") == "true";
  if (report.accepted.empty()) {
    std::vector<FieldError> fields;
    for (const auto& r : report.rejected) {
      fields.push_back({"row " + std::to_string(r.row_number) + ": " + r.field, r.message});
    }
    throw Error(ErrorCode::empty_batch, "the upload contains no valid evaluation rows",
                std::move(fields));
  }
  json out = {{"report", wire::to_json(report)}, {"committed", !dry_run}};
  if (!dry_run) out["upsert"] = wire::to_json(ingest::commit_evals(auth_, store_, ctx.who, report));
  return wire::json_response(200, out);
}

ApiResponse Api::list_users(Context& ctx) const {
  auth_.require(ctx.who, Action::manage_users);
  auto page = wire::parse_page(ctx.req);
  domain::UserScope scope{ctx.who.user.department_id, ctx.req.param("q").value_or("")};
  auto users = store_.query_users(scope);
  return wire::json_response(
      200, wire::paged(users, page, [](const auto& u) { return wire::to_json(u); }));
}

namespace {

domain::Role role_field(const json& body) {
  auto text = wire::string_field(body, "role");
  if (!text) return domain::Role::faculty;
  auto role = domain::parse_role(*text);
  if (!role) {
    throw Error(ErrorCode::field_errors, "the submitted form has errors",
                {{"role", "must be chair or faculty"}});
  }
  return *role;
}

}  // namespace

ApiResponse Api::create_user(Context& ctx) const {
  auth_.require(ctx.who, Action::manage_users);
  auto body = wire::parse_body(ctx.req);
  authz::NewUserProfile profile{require_string(body, "email"), require_string(body, "first_name"),
                                require_string(body, "last_name"), role_field(body)};
  auto mode_text = wire::string_field(body, "mode").value_or("invite");
  authz::CreationMode mode;
  if (mode_text == "invite") {
    mode = authz::CreationMode::invite;
  } else if (mode_text == "manual") {
    mode = authz::CreationMode::manual;
  } else {
    throw Error(ErrorCode::field_errors, "the submitted form has errors",
                {{"mode", "must be invite or manual"}});
  }
  auto created = auth_.create_user(ctx.who, profile, mode, wire::string_field(body, "password"));
  json invite = nullptr;
  if (created.invite) {
    invite = {{"sent_to", created.account.email},
              {"expires_at", wire::format_timestamp(created.invite->expires_at)}};
  }
  return wire::json_response(201, {{"user", wire::to_json(created.account)}, {"invite", invite}});
}

ApiResponse Api::update_user(Context& ctx) const {
  auth_.require(ctx.who, Action::manage_users);
  auto body = wire::parse_body(ctx.req);
  authz::UserPatch patch;
  patch.email = wire::string_field(body, "email");
  patch.first_name = wire::string_field(body, "first_name");
  patch.last_name = wire::string_field(body, "last_name");
  if (body.contains("role")) patch.role = role_field(body);
  auto user = auth_.update_user(ctx.who, ctx.params[0], patch);
  return wire::json_response(200, {{"user", wire::to_json(user)}});
}

ApiResponse Api::delete_user(Context& ctx) const {
  auto report = auth_.delete_user(ctx.who, ctx.params[0]);
  return wire::json_response(200, wire::to_json(report));
}

ApiResponse Api::redeem_invite(Context& ctx) const {
  auto body = wire::parse_body(ctx.req);
  auto user = auth_.redeem_invite(ctx.params[0], wire::string_field(body, "password").value_or(""));
  return wire::json_response(200, {{"user", wire::to_json(user)}});
}

}  // namespace facdash::api
