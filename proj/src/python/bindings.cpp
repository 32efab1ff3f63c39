#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "facdash/analytics/stats.hpp"
#include "facdash/api/app.hpp"
#include "facdash/api/seed.hpp"
#include "facdash/ingest/research_form.hpp"
#include "facdash/ingest/workbook.hpp"

namespace py = pybind11;
using namespace facdash;

namespace {

py::bytes as_bytes(const std::string& s) { return py::bytes(s); }

std::string as_string(const py::object& o) {
  if (py::isinstance<py::bytes>(o)) return o.cast<std::string>();
  if (py::isinstance<py::str>(o)) return o.cast<std::string>();
  throw py::type_error("expected str or bytes");
}

py::dict curve_dict(const analytics::DistributionCurve& c) {
  py::dict d;
  d["grid"] = c.grid;
  d["density"] = c.density;
  d["bandwidth"] = c.bandwidth;
  d["cohort_n"] = c.cohort_n;
  d["highlight"] = c.highlight;
  return d;
}

py::dict record_dict(const domain::EvaluationRecord& r) {
  py::dict d;
  d["instructor"] = r.instructor_id;
  d["course_prefix"] = r.course_key.prefix;
  d["course_number"] = r.course_key.number;
  d["section"] = r.course_key.section;
  d["term"] = std::string(domain::to_string(r.course_key.term));
  d["year"] = r.course_key.year;
  d["question_id"] = r.question_id;
  d["category"] = std::string(domain::to_string(r.category));
  d["responses"] = r.responses;
  return d;
}

py::dict report_dict(const ingest::ParseReport& r) {
  py::list accepted, rejected;
  for (const auto& rec : r.accepted) accepted.append(record_dict(rec));
  for (const auto& x : r.rejected) {
    py::dict d;
    d["row"] = x.row_number;
    d["field"] = x.field;
    d["message"] = x.message;
    rejected.append(d);
  }
  py::dict d;
  d["accepted"] = accepted;
  d["rejected"] = rejected;
  d["rows_read"] = r.totals.rows_read;
  return d;
}

// An in-process service with a manual clock and an in-memory outbox, for
// scripting and tests.
class Service {
 public:
  Service(const std::string& db_url, const std::string& base_url, int cohort_min,
          std::int64_t max_upload_bytes)
      : clock_(std::make_shared<ManualClock>()), mail_(std::make_shared<authz::MemoryMailSink>()) {
    api::Config config;
    config.db_url = db_url;
    config.base_url = base_url;
    config.cohort_min = cohort_min;
    config.max_upload_bytes = max_upload_bytes;
    while (!config.base_url.empty() && config.base_url.back() == '/') config.base_url.pop_back();
    app_ = api::App::create(config, {clock_, mail_, authz::HashCost::minimal()});
  }

  py::dict request(const std::string& method, const std::string& path, const py::object& body,
                   const std::map<std::string, std::string>& headers,
                   const std::map<std::string, std::string>& query,
                   const std::vector<std::tuple<std::string, std::string, std::string, py::object>>& parts) {
    api::ApiRequest req;
    req.method = method;
    req.path = path;
    for (const auto& [k, v] : headers) {
      std::string lower;
      for (char c : k) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      req.headers[lower] = v;
    }
    for (const auto& [k, v] : query) req.query.emplace(k, v);
    if (!body.is_none()) req.body = as_string(body);
    for (const auto& [name, filename, type, content] : parts) {
      req.parts.push_back({name, filename, type, as_string(content)});
    }
    api::ApiResponse res;
    {
      py::gil_scoped_release release;
      res = app_->api->handle(req);
    }
    py::dict d;
    d["status"] = res.status;
    d["content_type"] = res.content_type;
    d["headers"] = res.headers;
    d["body"] = as_bytes(res.body);
    return d;
  }

  py::dict seed(int faculty, std::uint32_t seed, bool research) {
    api::SeedOptions opts;
    opts.faculty = faculty;
    opts.seed = seed;
    opts.research = research;
    auto r = api::seed_department(*app_->store, *app_->auth, opts);
    auto account = [](const api::SeedAccount& a) {
      py::dict d;
      d["id"] = a.user_id;
      d["email"] = a.email;
      d["name"] = a.name;
      d["password"] = a.password;
      return d;
    };
    py::list fac;
    for (const auto& f : r.faculty) fac.append(account(f));
    py::dict d;
    d["department_id"] = r.department_id;
    d["chair"] = account(r.chair);
    d["faculty"] = fac;
    d["evaluations_csv"] = ingest::write_csv(r.evaluations);
    d["research_items"] = r.research_items;
    return d;
  }

  std::vector<std::tuple<std::string, std::string, std::string>> outbox() const {
    std::vector<std::tuple<std::string, std::string, std::string>> out;
    for (const auto& m : mail_->messages()) out.emplace_back(m.to, m.subject, m.body);
    return out;
  }

  void advance(long long seconds) { clock_->advance(std::chrono::seconds{seconds}); }

 private:
  std::shared_ptr<ManualClock> clock_;
  std::shared_ptr<authz::MemoryMailSink> mail_;
  std::unique_ptr<api::App> app_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Faculty dashboard core";

  // Raised for every domain error; carries .code and .fields.
  static PyObject* error_type = py::exception<Error>(m, "FacdashError").release().ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(std::string(to_string(e.code())) + ": " + e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      py::list fields;
      for (const auto& f : e.fields()) fields.append(py::make_tuple(f.field, f.message));
      exc.attr("fields") = fields;
      PyErr_SetObject(error_type, exc.ptr());
    }
  });

  m.def("round_to", &analytics::round_to, py::arg("x"), py::arg("decimals"));
  m.def(
      "question_mean",
      [](const std::array<std::int64_t, 5>& responses) {
        domain::EvaluationRecord r;
        r.responses = responses;
        return analytics::question_stats(r).mean;
      },
      py::arg("responses"), "Mean of a 1..5 response histogram, rounded half-up to 4 places.");
  m.def(
      "percentile_rank",
      [](double value, const std::vector<double>& population) {
        return analytics::percentile_rank(value, population);
      },
      py::arg("value"), py::arg("population"));
  m.def(
      "kde_bandwidth", [](const std::vector<double>& s) { return analytics::kde_bandwidth(s); },
      py::arg("samples"));
  m.def(
      "kde_density_at",
      [](const std::vector<double>& s, double h, double x) { return analytics::kde_density_at(s, h, x); },
      py::arg("samples"), py::arg("bandwidth"), py::arg("x"));
  m.def(
      "kde_curve",
      [](const std::vector<double>& s, std::optional<double> highlight) {
        return curve_dict(analytics::kde_curve(s, highlight));
      },
      py::arg("samples"), py::arg("highlight") = py::none());
  m.def(
      "trapezoid_integral",
      [](const std::vector<double>& g, const std::vector<double>& d) {
        return analytics::trapezoid_integral(g, d);
      },
      py::arg("grid"), py::arg("density"));

  m.def(
      "parse_cents",
      [](const std::string& text) -> std::optional<std::int64_t> {
        if (auto c = ingest::parse_cents(text)) return c->value;
        return std::nullopt;
      },
      py::arg("text"));
  m.def("read_csv", [](const py::object& o) { return ingest::read_csv(as_string(o)); });
  m.def("write_csv", &ingest::write_csv);
  m.def("read_xlsx", [](const py::bytes& b) { return ingest::read_xlsx(b.cast<std::string>()); });
  m.def(
      "write_xlsx",
      [](const ingest::Table& t, const std::string& sheet) { return as_bytes(ingest::write_xlsx(t, sheet)); },
      py::arg("table"), py::arg("sheet_name") = "Sheet1");
  m.def(
      "parse_eval_workbook",
      [](const py::object& payload, const std::string& format) {
        auto f = ingest::parse_workbook_format(format);
        if (!f) throw Error(ErrorCode::bad_request, "format must be xlsx or csv");
        // Instructors resolve to their own email.
        return report_dict(ingest::parse_eval_workbook(
            as_string(payload), *f, [](std::string_view e) { return std::string(e); }));
      },
      py::arg("payload"), py::arg("format"));

  m.def("routes", [] {
    py::list out;
    for (const auto& r : api::routes()) {
      py::dict d;
      d["method"] = std::string(r.method);
      d["path"] = "/api" + std::string(r.pattern);
      d["authenticated"] = r.authenticated;
      d["csrf"] = r.csrf;
      out.append(d);
    }
    return out;
  });

  py::class_<Service>(m, "Service")
      .def(py::init<const std::string&, const std::string&, int, std::int64_t>(),
           py::arg("db_url") = "sqlite::memory:", py::arg("base_url") = "http://localhost:8080",
           py::arg("cohort_min") = 4, py::arg("max_upload_bytes") = 10 * 1024 * 1024)
      .def("request", &Service::request, py::arg("method"), py::arg("path"),
           py::arg("body") = py::none(), py::arg("headers") = std::map<std::string, std::string>{},
           py::arg("query") = std::map<std::string, std::string>{},
           py::arg("parts") =
               std::vector<std::tuple<std::string, std::string, std::string, py::object>>{})
      .def("seed", &Service::seed, py::arg("faculty") = 6, py::arg("seed") = 1,
           py::arg("research") = true)
      .def("outbox", &Service::outbox)
      .def("advance", &Service::advance, py::arg("seconds"));
}
