#include "facdash/ingest/research_form.hpp"

#include <cctype>
#include <charconv>
#include <limits>

namespace facdash::ingest {

using namespace domain;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

class FormReader {
 public:
  explicit FormReader(const FormFields& fields) : fields_(fields) {}

  std::string_view raw(std::string_view name) const {
    auto it = fields_.find(name);
    return it == fields_.end() ? std::string_view{} : trim(it->second);
  }

  std::string text(std::string_view name, std::size_t max_len) {
    auto v = raw(name);
    if (v.empty()) {
      fail(name, "is required");
    } else if (v.size() > max_len) {
      fail(name, "must be at most " + std::to_string(max_len) + " characters");
    }
    return std::string(v);
  }

  Cents amount(std::string_view name) {
    auto v = raw(name);
    if (v.empty()) {
      fail(name, "is required");
      return {};
    }
    auto cents = parse_cents(v);
    if (!cents) fail(name, "must be a non-negative amount with at most two decimals");
    return cents.value_or(Cents{});
  }

  std::optional<Date> date(std::string_view name) {
    auto v = raw(name);
    if (v.empty()) {
      fail(name, "is required");
      return std::nullopt;
    }
    auto d = parse_iso_date(v);
    if (!d) fail(name, "must be a date in YYYY-MM-DD form");
    return d;
  }

  int year(std::string_view name) {
    auto v = raw(name);
    int y = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), y);
    if (v.empty()) {
      fail(name, "is required");
    } else if (ec != std::errc{} || ptr != v.data() + v.size() || y < kMinYear || y > kMaxYear) {
      fail(name, "must be a year between 1900 and 2200");
    }
    return y;
  }

  void fail(std::string_view field, std::string message) {
    errors_.push_back({std::string(field), std::move(message)});
  }

  bool has_error(std::string_view field) const {
    for (const auto& e : errors_) {
      if (e.field == field) return true;
    }
    return false;
  }

  std::vector<FieldError>& errors() { return errors_; }

 private:
  const FormFields& fields_;
  std::vector<FieldError> errors_;
};

}  // namespace

std::optional<Cents> parse_cents(std::string_view text) {
  text = trim(text);
  auto dot = text.find('.');
  auto whole = text.substr(0, dot);
  auto frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if (whole.empty() && frac.empty()) return std::nullopt;
  if (dot != std::string_view::npos && (frac.empty() || frac.size() > 2)) return std::nullopt;

  constexpr auto kMax = std::numeric_limits<std::int64_t>::max() / 100 - 1;
  std::int64_t units = 0;
  for (char c : whole) {
    if (c < '0' || c > '9') return std::nullopt;
    units = units * 10 + (c - '0');
    if (units > kMax) return std::nullopt;
  }
  std::int64_t cents = 0;
  for (std::size_t i = 0; i < 2; ++i) {
    char c = i < frac.size() ? frac[i] : '0';
    if (c < '0' || c > '9') return std::nullopt;
    cents = cents * 10 + (c - '0');
  }
  return Cents{units * 100 + cents};
}

ResearchItem validate_research_item(ResearchKind kind, const FormFields& fields) {
  FormReader form(fields);
  ResearchItem item;
  switch (kind) {
    case ResearchKind::grant: {
      Grant g;
      g.title = form.text("title", 500);
      g.funding_agency = form.text("funding_agency", 200);
      g.amount = form.amount("amount");
      auto start = form.date("start_date");
      auto end = form.date("end_date");
      if (start) {
        g.start_date = *start;
        auto y = static_cast<int>(start->year());
        if (y < kMinYear || y > kMaxYear) form.fail("start_date", "year must be within 1900-2200");
      }
      if (end) g.end_date = *end;
      if (start && end && *end < *start) form.fail("end_date", "must not be before start_date");
      item.body = g;
      break;
    }
    case ResearchKind::publication: {
      Publication p;
      p.title = form.text("title", 500);
      p.venue = form.text("venue", 300);
      p.publication_year = form.year("publication_year");
      p.author_list = form.text("author_list", 2000);
      item.body = p;
      break;
    }
    case ResearchKind::expenditure: {
      Expenditure e;
      e.description = form.text("description", 500);
      e.amount = form.amount("amount");
      e.fiscal_year = form.year("fiscal_year");
      item.body = e;
      break;
    }
  }
  if (!form.errors().empty()) {
    throw Error(ErrorCode::field_errors, "the submitted form has errors", std::move(form.errors()));
  }
  return item;
}

}  // namespace facdash::ingest
