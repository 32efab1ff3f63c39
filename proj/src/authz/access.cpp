#include "facdash/authz/access.hpp"

#include <array>

namespace facdash::authz {

namespace {
constexpr std::array kActions{
    Action::view_profile,        Action::change_password, Action::manage_photo,
    Action::delete_own_data,     Action::end_session,     Action::view_dashboard,
    Action::view_evaluations,    Action::view_course_analytics, Action::view_research,
    Action::report_research,     Action::view_team,       Action::upload_evaluations,
    Action::manage_users,
};
}  // namespace

std::string_view to_string(Action a) noexcept {
  switch (a) {
    case Action::view_profile: return "view-profile";
    case Action::change_password: return "change-password";
    case Action::manage_photo: return "manage-photo";
    case Action::delete_own_data: return "delete-own-data";
    case Action::end_session: return "end-session";
    case Action::view_dashboard: return "view-dashboard";
    case Action::view_evaluations: return "view-evaluations";
    case Action::view_course_analytics: return "view-course-analytics";
    case Action::view_research: return "view-research";
    case Action::report_research: return "report-research";
    case Action::view_team: return "view-team";
    case Action::upload_evaluations: return "upload-evaluations";
    case Action::manage_users: return "manage-users";
  }
  return "unknown";
}

std::span<const Action> all_actions() noexcept { return kActions; }

std::string_view to_string(AccessReason r) noexcept {
  switch (r) {
    case AccessReason::ok: return "ok";
    case AccessReason::not_authenticated: return "not-authenticated";
    case AccessReason::wrong_role: return "wrong-role";
    case AccessReason::out_of_scope: return "out-of-scope";
  }
  return "ok";
}

ActionScope scope_of(Action a) noexcept {
  switch (a) {
    case Action::view_profile:
    case Action::change_password:
    case Action::manage_photo:
    case Action::delete_own_data:
    case Action::end_session:
    case Action::view_dashboard:
    case Action::report_research:
      return ActionScope::self_only;
    case Action::view_evaluations:
    case Action::view_research:
      return ActionScope::subject_view;
    case Action::view_course_analytics:
      return ActionScope::choose_person;
    case Action::view_team:
    case Action::upload_evaluations:
    case Action::manage_users:
      return ActionScope::chair_only;
  }
  return ActionScope::chair_only;
}

AccessDecision decide(std::optional<domain::Role> role, Action action, SubjectRelation relation) {
  using enum AccessReason;
  if (!role) return AccessDecision::deny(not_authenticated);

  const bool chair = *role == domain::Role::chair;
  const bool own = relation == SubjectRelation::none || relation == SubjectRelation::self;

  switch (scope_of(action)) {
    case ActionScope::self_only:
      return own ? AccessDecision::allow() : AccessDecision::deny(out_of_scope);

    case ActionScope::subject_view:
    case ActionScope::choose_person:
      if (own) return AccessDecision::allow();
      if (!chair) {
        return AccessDecision::deny(scope_of(action) == ActionScope::choose_person ? wrong_role
                                                                                  : out_of_scope);
      }
      return relation == SubjectRelation::same_department ? AccessDecision::allow()
                                                          : AccessDecision::deny(out_of_scope);

    case ActionScope::chair_only:
      if (!chair) return AccessDecision::deny(wrong_role);
      return relation == SubjectRelation::other_department ? AccessDecision::deny(out_of_scope)
                                                           : AccessDecision::allow();
  }
  return AccessDecision::deny(out_of_scope);
}

}  // namespace facdash::authz
