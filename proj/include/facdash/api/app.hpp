#pragma once

#include <memory>

#include "facdash/analytics/service.hpp"
#include "facdash/api/api.hpp"
#include "facdash/api/config.hpp"
#include "facdash/authz/auth_service.hpp"
#include "facdash/authz/mail.hpp"
#include "facdash/clock.hpp"
#include "facdash/domain/store.hpp"

namespace facdash::api {

// Replacements for the production collaborators; tests inject a manual
// clock, a mail sink and a cheap hash cost.
struct AppOverrides {
  std::shared_ptr<Clock> clock;
  std::shared_ptr<authz::MailTransport> mail;
  std::optional<authz::HashCost> hash_cost;
};

// The whole service graph wired from a Config. Opening the store applies
// any pending migrations.
struct App {
  Config config;
  std::shared_ptr<Clock> clock;
  std::shared_ptr<authz::MailTransport> mail;
  std::unique_ptr<domain::Store> store;
  std::unique_ptr<authz::AuthService> auth;
  std::unique_ptr<analytics::AnalyticsService> analytics;
  std::unique_ptr<Api> api;

  static std::unique_ptr<App> create(const Config& config, AppOverrides overrides = {});
};

}  // namespace facdash::api
