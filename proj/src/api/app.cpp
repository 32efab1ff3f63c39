#include "facdash/api/app.hpp"

#include <iostream>

namespace facdash::api {

std::unique_ptr<App> App::create(const Config& config, AppOverrides overrides) {
  auto app = std::make_unique<App>();
  app->config = config;
  app->clock = overrides.clock ? overrides.clock : std::make_shared<SystemClock>();
  if (overrides.mail) {
    app->mail = overrides.mail;
  } else if (!config.smtp_url.empty()) {
    app->mail = std::make_shared<authz::SmtpMailTransport>(config.smtp_url, config.smtp_from);
  } else {
    app->mail = std::make_shared<authz::LogMailTransport>(std::clog);
  }
  app->store = domain::Store::open(config.db_url);

  authz::AuthOptions opts;
  opts.base_url = config.base_url;
  if (overrides.hash_cost) opts.hash_cost = *overrides.hash_cost;
  app->auth = std::make_unique<authz::AuthService>(*app->store, *app->clock, *app->mail, opts);
  app->analytics = std::make_unique<analytics::AnalyticsService>(*app->store, *app->auth,
                                                                 *app->clock, config.cohort_min);
  app->api = std::make_unique<Api>(*app->store, *app->auth, *app->analytics, config);
  return app;
}

}  // namespace facdash::api
