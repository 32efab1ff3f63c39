#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include "api/wire.hpp"
#include "facdash/analytics/stats.hpp"
#include "facdash/api/app.hpp"
#include "facdash/api/seed.hpp"
#include "facdash/api/server.hpp"
#include "facdash/ingest/workbook.hpp"

using namespace facdash;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::bad_request, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()))) {
    throw Error(ErrorCode::bad_request, "cannot write " + path);
  }
}

ingest::WorkbookFormat format_of(const std::string& path, const std::string& forced) {
  if (!forced.empty()) {
    if (auto f = ingest::parse_workbook_format(forced)) return *f;
    throw Error(ErrorCode::bad_request, "unknown format " + forced);
  }
  return path.ends_with(".csv") ? ingest::WorkbookFormat::csv : ingest::WorkbookFormat::xlsx;
}

api::HttpServer* g_server = nullptr;

extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Faculty dashboard service"};
  cli.require_subcommand(1);
  std::string db_override;
  cli.add_option("--db", db_override, "Database URL; overrides DB_URL");

  auto config = [&] {
    auto c = api::Config::from_env();
    if (!db_override.empty()) c.db_url = db_override;
    return c;
  };

  auto* serve = cli.add_subcommand("serve", "Run the HTTP API");
  std::string host = "0.0.0.0";
  int port = 8080;
  serve->add_option("--host", host);
  serve->add_option("--port", port);

  auto* migrate = cli.add_subcommand("migrate", "Apply pending migrations and print the schema version");

  auto* seed = cli.add_subcommand("seed", "Create a demo department with evaluations and research");
  api::SeedOptions so;
  std::string workbook_out;
  seed->add_option("--department", so.department);
  seed->add_option("--faculty", so.faculty)->check(CLI::Range(1, 200));
  seed->add_option("--seed", so.seed);
  seed->add_option("--first-year", so.first_year);
  seed->add_option("--last-year", so.last_year);
  seed->add_option("--domain", so.email_domain);
  seed->add_option("--chair-password", so.chair_password);
  seed->add_option("--faculty-password", so.faculty_password);
  seed->add_flag("!--no-research", so.research, "Skip grants, publications and expenditures");
  seed->add_option("--workbook-out", workbook_out,
                   "Write the evaluation sheet (.xlsx or .csv) instead of committing it");

  auto* boot = cli.add_subcommand("bootstrap", "Create a department and its first chair");
  std::string dept_name, email, first, last, password;
  boot->add_option("--department", dept_name)->required();
  boot->add_option("--email", email)->required();
  boot->add_option("--first-name", first)->required();
  boot->add_option("--last-name", last)->required();
  boot->add_option("--password", password)->required();

  auto* parse = cli.add_subcommand("parse", "Validate an evaluation workbook without storing it");
  std::string parse_path, parse_format;
  parse->add_option("file", parse_path)->required()->check(CLI::ExistingFile);
  parse->add_option("--format", parse_format, "xlsx or csv; inferred from the extension");

  auto* kde = cli.add_subcommand("kde", "Print the density curve for whitespace-separated samples on stdin");
  std::optional<double> highlight;
  kde->add_option("--highlight", highlight);

  CLI11_PARSE(cli, argc, argv);

  try {
    if (*serve) {
      auto app = api::App::create(config());
      api::HttpServer server(*app->api, app->config);
      if (server.bind(host, port) < 0) {
        std::cerr << "cannot bind " << host << ":" << port << "\n";
        return 1;
      }
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::clog << "listening on " << host << ":" << server.port() << "\n";
      server.run();
      g_server = nullptr;
    } else if (*migrate) {
      auto store = domain::Store::open(config().db_url);
      std::cout << "schema version " << store->schema_version() << "\n";
    } else if (*seed) {
      auto app = api::App::create(config());
      auto result = api::seed_department(*app->store, *app->auth, so);
      json out = {{"department_id", result.department_id},
                  {"chair", {{"email", result.chair.email}, {"password", result.chair.password}}},
                  {"faculty", json::array()},
                  {"research_items", result.research_items}};
      for (const auto& f : result.faculty) {
        out["faculty"].push_back({{"email", f.email}, {"name", f.name}});
      }
      if (!workbook_out.empty()) {
        write_file(workbook_out, workbook_out.ends_with(".csv")
                                     ? ingest::write_csv(result.evaluations)
                                     : ingest::write_xlsx(result.evaluations, "Evaluations"));
        out["workbook"] = workbook_out;
      } else {
        auto session = app->auth->login(result.chair.email, result.chair.password);
        auto chair = app->auth->authenticate(session.id);
        auto report = ingest::parse_eval_table(
            result.evaluations, ingest::store_resolver(*app->store, result.department_id));
        out["evaluations"] = api::wire::to_json(ingest::commit_evals(*app->auth, *app->store, chair, report));
        app->auth->logout(session.id);
      }
      std::cout << out.dump(2) << "\n";
    } else if (*boot) {
      auto app = api::App::create(config());
      auto dept = app->store->create_department(dept_name);
      auto user = app->auth->bootstrap_chair(dept, {email, first, last, domain::Role::chair}, password);
      std::cout << json{{"department_id", dept}, {"user", api::wire::to_json(user)}}.dump(2) << "\n";
    } else if (*parse) {
      auto report = ingest::parse_eval_workbook(read_file(parse_path), format_of(parse_path, parse_format),
                                                [](std::string_view e) { return std::string(e); });
      std::cout << api::wire::to_json(report).dump(2) << "\n";
      return report.totals.rejected == 0 ? 0 : 2;
    } else if (*kde) {
      std::vector<double> samples{std::istream_iterator<double>(std::cin), {}};
      std::cout << api::wire::to_json(analytics::kde_curve(samples, highlight)).dump() << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    for (const auto& f : e.fields()) std::cerr << "  " << f.field << ": " << f.message << "\n";
    return 1;
  }
  return 0;
}
