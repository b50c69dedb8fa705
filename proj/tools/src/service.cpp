#include "upsilon/service.hpp"

#include <httplib.h>

#include <fmt/format.h>

#include "upsilon/simkit.hpp"

namespace upsilon {

namespace fs = std::filesystem;

namespace {

std::int64_t int_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::InvalidArgument, fmt::format("missing field '{}'", key));
  const auto& v = j.at(key);
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_string()) return std::get<std::int64_t>(parse_scalar(v.get<std::string>(), ColumnType::integer));
  throw Error(ErrorCode::InvalidArgument, fmt::format("field '{}' must be an integer", key));
}

std::int64_t int_text(const std::string& text, const char* what) {
  try {
    return std::get<std::int64_t>(parse_scalar(text, ColumnType::integer));
  } catch (const Error&) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("{} must be an integer", what));
  }
}

nlohmann::json parse_body(const ApiRequest& req) {
  if (req.body.empty()) return nlohmann::json::object();
  auto j = nlohmann::json::parse(req.body, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::InvalidArgument, "request body is not JSON");
  return j;
}

const std::string* part(const ApiRequest& req, const std::string& name) {
  auto it = req.parts.find(name);
  return it == req.parts.end() ? nullptr : &it->second;
}

std::vector<std::int64_t> id_list(std::string text) {
  std::replace(text.begin(), text.end(), ',', ' ');
  std::vector<std::int64_t> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto b = text.find_first_not_of(' ', pos);
    if (b == std::string::npos) break;
    auto e = text.find(' ', b);
    out.push_back(int_text(text.substr(b, e - b), "target"));
    pos = e == std::string::npos ? text.size() : e;
  }
  return out;
}

Predicate filters(const ApiRequest& req) {
  Predicate p;
  auto add = [&](const std::string& term) {
    auto eq = term.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::InvalidArgument, "filter term '" + term + "' lacks '='");
    p.emplace_back(term.substr(0, eq), term.substr(eq + 1));
  };
  for (const auto& [k, v] : req.query) {
    if (k == "where") add(v);
    if (k != "filter") continue;
    std::size_t pos = 0;
    while (pos <= v.size()) {
      auto e = v.find(',', pos);
      auto term = v.substr(pos, e == std::string::npos ? std::string::npos : e - pos);
      if (!term.empty()) add(term);
      if (e == std::string::npos) break;
      pos = e + 1;
    }
  }
  return p;
}

std::vector<double> at_values(const nlohmann::json& j) {
  std::vector<double> at;
  if (!j.contains("at") || j.at("at").is_null()) return at;
  const auto& a = j.at("at");
  if (a.is_array()) {
    for (const auto& v : a) at.push_back(v.get<double>());
  } else {
    at.push_back(a.get<double>());
  }
  return at;
}

ApiResponse ok(nlohmann::json body, int status = 200) { return ApiResponse{status, std::move(body)}; }

}  // namespace

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownRelation:
    case ErrorCode::UnknownPhenomenon:
    case ErrorCode::UnknownHypothesis:
      return 404;
    case ErrorCode::StageViolation:
    case ErrorCode::NotUIntroduced:
    case ErrorCode::DuplicatePhenomenon:
    case ErrorCode::DuplicateHypothesis:
    case ErrorCode::DuplicateRelation:
    case ErrorCode::DuplicateTrial:
    case ErrorCode::ProjectNotInitialized:
      return 409;
    case ErrorCode::Io:
      return 500;
    default:
      return 400;
  }
}

nlohmann::json error_json(const Error& e) { return {{"code", to_string(e.code())}, {"detail", e.detail()}}; }

void FifoMutex::lock() {
  std::unique_lock lk(m_);
  const auto ticket = next_++;
  cv_.wait(lk, [&] { return serving_ == ticket; });
}

void FifoMutex::unlock() {
  {
    std::lock_guard lk(m_);
    ++serving_;
  }
  cv_.notify_all();
}

ObservationSet observations_from_json(const nlohmann::json& j) {
  const auto phi = int_field(j, "phi");
  std::optional<double> sigma;
  if (j.contains("sigma") && !j.at("sigma").is_null()) sigma = j.at("sigma").get<double>();
  const std::string index = j.value("index", std::string("t"));

  if (j.contains("csv")) {
    std::vector<std::pair<Symbol, std::string>> mapping;
    if (j.contains("map")) {
      const auto& m = j.at("map");
      if (m.is_array()) {
        for (const auto& kv : m) mapping.emplace_back(kv.at(0).get<std::string>(), kv.at(1).get<std::string>());
      } else {
        if (!m.contains(index)) throw Error(ErrorCode::InvalidArgument, "map lacks the index symbol " + index);
        mapping.emplace_back(index, m.at(index).get<std::string>());
        for (const auto& [k, v] : m.items()) {
          if (k != index) mapping.emplace_back(k, v.get<std::string>());
        }
      }
    }
    return parse_observation_csv(j.at("csv").get<std::string>(), phi, mapping, sigma);
  }

  ObservationSet obs;
  obs.phenomenon = phi;
  obs.index_symbol = index;
  obs.output_symbol = j.value("output", std::string("x"));
  obs.index_label = j.value("index_label", obs.index_symbol);
  obs.value_label = j.value("value_label", obs.output_symbol);
  if (j.contains("samples")) {
    for (const auto& s : j.at("samples")) {
      if (s.is_array()) {
        obs.samples.emplace_back(s.at(0).get<double>(), s.at(1).get<double>());
      } else {
        obs.samples.emplace_back(s.at("index").get<double>(), s.at("value").get<double>());
      }
    }
  }
  if (obs.samples.empty()) throw Error(ErrorCode::EmptyObservationSet, "no observations");
  if (sigma) {
    obs.sigma = *sigma;
  } else {
    obs.sigma = heuristic_sigma(obs);
    obs.sigma_heuristic = true;
  }
  validate(obs);
  return obs;
}

Service::Service(const fs::path& root)
    : root_(root), project_(Project::open(root)), server_(std::make_unique<httplib::Server>()) {}

Service::~Service() = default;

ApiResponse Service::handle(const ApiRequest& req) {
  try {
    return dispatch(req);
  } catch (const Error& e) {
    return ApiResponse{http_status(e.code()), error_json(e)};
  } catch (const nlohmann::json::exception& e) {
    return ApiResponse{400, {{"code", "InvalidArgument"}, {"detail", e.what()}}};
  } catch (const std::exception& e) {
    return ApiResponse{500, {{"code", "Internal"}, {"detail", e.what()}}};
  }
}

ApiResponse Service::dispatch(const ApiRequest& req) {
  if (req.method == "GET") {
    std::shared_lock lk(state_);
    return read(req);
  }
  if (req.method == "POST") {
    if (req.path == "/sim") {
      auto model = sim::model_from_json(parse_body(req));
      return ok({{"csv", format_trial_csv(sim::simulate(model))}});
    }
    if (req.path == "/condition") {
      auto j = parse_body(req);
      if (j.value("dry_run", false)) {
        std::shared_lock lk(state_);
        auto obs = observations_from_json(j);
        auto at = at_values(j);
        return ok(project_.condition(obs, at, true).to_json());
      }
    }
    std::lock_guard queue(writers_);
    std::unique_lock lk(state_);
    ProjectLock on_disk(root_, true);
    return write(req);
  }
  return ApiResponse{405, {{"code", "MethodNotAllowed"}, {"detail", req.method}}};
}

ApiResponse Service::read(const ApiRequest& req) {
  const auto& p = req.path;
  if (p == "/catalog") return ok(project_.catalog_json());
  if (p == "/world-table") return ok(project_.world_table_json());
  if (p == "/predictions") {
    auto it = req.query.find("phi");
    if (it == req.query.end()) throw Error(ErrorCode::InvalidArgument, "missing query parameter phi");
    return ok(project_.predictions_json(int_text(it->second, "phi")));
  }
  if (p.starts_with("/relations/")) {
    const auto name = p.substr(std::string_view("/relations/").size());
    auto j = to_json(project_.query(name, filters(req)));
    j["name"] = name;
    return ok(j);
  }
  if (p == "/relations") {
    nlohmann::json names = project_.db().table_names();
    for (const auto& [name, u] : project_.udb().relations()) names.push_back(name);
    return ok({{"relations", names}});
  }
  return ApiResponse{404, {{"code", "NotFound"}, {"detail", p}}};
}

ApiResponse Service::write(const ApiRequest& req) {
  const auto& p = req.path;
  if (p == "/phenomena") {
    const std::string* file = part(req, "phenomenon");
    auto decl = project_.add_phenomenon(file ? *file : req.body);
    return ok({{"phi", decl.phenomenon_id}, {"description", decl.description}}, 201);
  }
  if (p == "/hypotheses") {
    std::vector<std::int64_t> targets;
    std::string descriptor;
    if (const auto* d = part(req, "descriptor")) {
      descriptor = *d;
      if (const auto* t = part(req, "targets")) targets = id_list(*t);
    } else {
      descriptor = req.body;
    }
    for (auto range = req.query.equal_range("targets"); range.first != range.second; ++range.first) {
      for (auto t : id_list(range.first->second)) targets.push_back(t);
    }
    if (descriptor.empty()) throw Error(ErrorCode::InvalidArgument, "no descriptor uploaded");
    return ok(project_.add_hypothesis(descriptor, targets).to_json(), 201);
  }
  if (p == "/trials") {
    TrialDataset d;
    if (const auto* csv = part(req, "trial")) {
      d = parse_trial_csv(*csv);
      const auto* phi = part(req, "phi");
      const auto* up = part(req, "upsilon");
      if (!phi || !up) throw Error(ErrorCode::InvalidArgument, "phi and upsilon fields are required");
      d.phenomenon_id = int_text(*phi, "phi");
      d.hypothesis_id = int_text(*up, "upsilon");
    } else {
      auto j = parse_body(req);
      if (j.contains("model")) {
        auto m = sim::model_from_json(j.at("model"));
        d = sim::simulate(m);
      } else if (j.contains("csv")) {
        d = parse_trial_csv(j.at("csv").get<std::string>());
      } else {
        throw Error(ErrorCode::InvalidArgument, "trial needs csv or model");
      }
      d.phenomenon_id = int_field(j, "phi");
      d.hypothesis_id = int_field(j, "upsilon");
    }
    auto tid = project_.load_trial(d);
    return ok({{"phi", d.phenomenon_id}, {"upsilon", d.hypothesis_id}, {"tid", tid}}, 201);
  }
  if (p == "/targets") {
    auto j = parse_body(req);
    project_.add_target(int_field(j, "phi"), int_field(j, "upsilon"));
    return ok({{"phi", int_field(j, "phi")}, {"upsilon", int_field(j, "upsilon")}}, 201);
  }
  if (p == "/u-intro") {
    auto j = parse_body(req);
    auto phi = int_field(j, "phi");
    auto warnings = project_.u_intro(phi);
    return ok({{"phi", phi}, {"worlds", project_.udb().worlds(phi)->size()}, {"warnings", warnings}});
  }
  if (p == "/condition") {
    auto j = parse_body(req);
    auto obs = observations_from_json(j);
    auto at = at_values(j);
    return ok(project_.condition(obs, at, false).to_json());
  }
  return ApiResponse{404, {{"code", "NotFound"}, {"detail", p}}};
}

bool Service::listen(const std::string& host, int port, const fs::path& static_dir) {
  return bind(host, port, static_dir) > 0 && serve();
}

int Service::bind(const std::string& host, int port, const fs::path& static_dir) {
  auto& srv = *server_;
  auto bridge = [this](const httplib::Request& hreq, httplib::Response& hres) {
    ApiRequest req;
    req.method = hreq.method;
    req.path = hreq.path;
    for (const auto& [k, v] : hreq.params) req.query.emplace(k, v);
    req.body = hreq.body;
    req.content_type = hreq.get_header_value("Content-Type");
    for (const auto& [name, f] : hreq.files) req.parts[name] = f.content;
    auto res = handle(req);
    hres.status = res.status;
    hres.set_content(res.body.dump(), "application/json");
  };
  if (!static_dir.empty()) srv.set_mount_point("/ui", static_dir.string());
  srv.Get(".*", bridge);
  srv.Post(".*", bridge);
  if (port == 0) return srv.bind_to_any_port(host);
  return srv.bind_to_port(host, port) ? port : -1;
}

bool Service::serve() { return server_->listen_after_bind(); }

void Service::stop() { server_->stop(); }

}  // namespace upsilon
