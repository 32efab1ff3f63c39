#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "facdash/domain/types.hpp"

namespace facdash::authz {

// Every protected operation names one of these. The API endpoint table maps
// each route onto exactly one action.
enum class Action {
  view_profile,
  change_password,
  manage_photo,
  delete_own_data,
  end_session,
  view_dashboard,
  view_evaluations,
  view_course_analytics,
  view_research,
  report_research,
  view_team,
  upload_evaluations,
  manage_users,
};

std::string_view to_string(Action a) noexcept;
std::span<const Action> all_actions() noexcept;

enum class AccessReason { ok, not_authenticated, wrong_role, out_of_scope };

std::string_view to_string(AccessReason r) noexcept;

class AccessDecision {
 public:
  static AccessDecision allow() { return AccessDecision(AccessReason::ok); }
  static AccessDecision deny(AccessReason why) { return AccessDecision(why); }

  bool allowed() const noexcept { return reason_ == AccessReason::ok; }
  AccessReason reason() const noexcept { return reason_; }
  friend bool operator==(const AccessDecision&, const AccessDecision&) = default;

 private:
  explicit AccessDecision(AccessReason r) : reason_(r) {}
  AccessReason reason_;
};

// How the subject of a request relates to the requester.
enum class SubjectRelation { none, self, same_department, other_department };

// How an action treats a subject other than the requester.
enum class ActionScope {
  self_only,        // the requester's own account, for every role
  subject_view,     // chairs may name department members; faculty get out-of-scope
  choose_person,    // chairs may name department members; faculty get wrong-role
  chair_only,       // faculty get wrong-role; chairs act within their department
};

ActionScope scope_of(Action a) noexcept;

// The authorization matrix. role is nullopt for an anonymous or expired
// session.
AccessDecision decide(std::optional<domain::Role> role, Action action, SubjectRelation relation);

}  // namespace facdash::authz
