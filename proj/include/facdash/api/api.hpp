#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "facdash/analytics/service.hpp"
#include "facdash/api/config.hpp"
#include "facdash/api/http.hpp"
#include "facdash/authz/auth_service.hpp"
#include "facdash/domain/store.hpp"

namespace facdash::api {

// HTTP status for an error code.
int status_of(ErrorCode code) noexcept;

struct RouteInfo {
  std::string_view method;
  // Path under /api; "{name}" marks a path parameter.
  std::string_view pattern;
  // Whether a session is needed, and whether the CSRF header is checked.
  bool authenticated;
  bool csrf;
};

// Every route the service answers, in table order.
std::span<const RouteInfo> routes() noexcept;

class Api {
 public:
  Api(domain::Store& store, authz::AuthService& auth, const analytics::AnalyticsService& analytics,
      const Config& config);

  // Never throws; failures become error responses.
  ApiResponse handle(const ApiRequest& request) const;

 private:
  struct Context;
  using Handler = ApiResponse (Api::*)(Context&) const;

  ApiResponse dispatch(const ApiRequest& request) const;

  ApiResponse login(Context&) const;
  ApiResponse logout(Context&) const;
  ApiResponse me(Context&) const;
  ApiResponse change_password(Context&) const;
  ApiResponse put_photo(Context&) const;
  ApiResponse get_photo(Context&) const;
  ApiResponse delete_own_data(Context&) const;
  ApiResponse dashboard(Context&) const;
  ApiResponse list_evals(Context&) const;
  ApiResponse eval_questions(Context&) const;
  ApiResponse course_analytics(Context&) const;
  ApiResponse list_grants(Context&) const;
  ApiResponse list_publications(Context&) const;
  ApiResponse list_expenditures(Context&) const;
  ApiResponse post_grant(Context&) const;
  ApiResponse post_publication(Context&) const;
  ApiResponse post_expenditure(Context&) const;
  ApiResponse team(Context&) const;
  ApiResponse upload_evals(Context&) const;
  ApiResponse list_users(Context&) const;
  ApiResponse create_user(Context&) const;
  ApiResponse update_user(Context&) const;
  ApiResponse delete_user(Context&) const;
  ApiResponse redeem_invite(Context&) const;

  ApiResponse list_research(Context&, domain::ResearchKind kind) const;
  ApiResponse post_research(Context&, domain::ResearchKind kind) const;

  static Handler handler_for(std::size_t route_index);

  domain::Store& store_;
  authz::AuthService& auth_;
  const analytics::AnalyticsService& analytics_;
  Config config_;
};

}  // namespace facdash::api
