#pragma once

// JSON shapes and query-parameter grammar shared by the handlers.

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>

#include "facdash/analytics/service.hpp"
#include "facdash/api/http.hpp"
#include "facdash/domain/types.hpp"
#include "facdash/ingest/workbook.hpp"

namespace facdash::api::wire {

using nlohmann::json;

inline constexpr int kDefaultLimit = 50;
inline constexpr int kMaxLimit = 500;

struct Page {
  std::size_t limit = kDefaultLimit;
  std::size_t offset = 0;
};

// All throw Error{bad_request} on malformed input.
domain::TermWindow parse_window(std::string_view text);
std::string format_window(const domain::TermWindow& w);
domain::TermRef parse_term_ref(std::string_view text);
domain::CourseId parse_course(std::string_view text);
Page parse_page(const ApiRequest& req);
json parse_body(const ApiRequest& req);

// Optional string member of a JSON object; throws Error{field_errors} when
// present with another type.
std::optional<std::string> string_field(const json& body, const char* name);

template <typename T, typename Fn>
json paged(const std::vector<T>& items, const Page& page, Fn&& to) {
  json out = json::array();
  for (std::size_t i = page.offset; i < items.size() && i < page.offset + page.limit; ++i) {
    out.push_back(to(items[i]));
  }
  return {{"items", std::move(out)},
          {"total", items.size()},
          {"limit", page.limit},
          {"offset", page.offset}};
}

std::string format_timestamp(Timestamp t);
json rating(std::optional<double> v);
json to_json(const domain::UserAccount& u);
json to_json(const domain::CourseKey& k);
json to_json(const analytics::SectionAverages& s);
json to_json(const analytics::QuestionStats& q);
json to_json(const analytics::DistributionCurve& c);
json to_json(const domain::ResearchItem& item);
json to_json(const domain::DeletionReport& r);
json to_json(const analytics::TeamSummaryRow& r);
json to_json(const analytics::DashboardSummary& d);
json to_json(const ingest::ParseReport& r);
json to_json(const domain::UpsertSummary& s);

json error_body(int status, ErrorCode code, std::string_view message,
                const std::vector<FieldError>& fields = {});

ApiResponse json_response(int status, const json& body);

}  // namespace facdash::api::wire
