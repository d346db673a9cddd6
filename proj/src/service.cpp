#include "ppm/service.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <random>

#include <httplib.h>

#include "ppm/error.hpp"

namespace ppm {

struct Service::ServerHandle {
  httplib::Server server;
};

namespace {

HttpResponse json_response(int status, const nlohmann::json& j) { return {status, j.dump()}; }

HttpResponse error_response(int status, std::string_view message) {
  return json_response(status, {{"error", message}});
}

std::string now_string() {
  return format_timestamp(std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now()));
}

std::vector<std::string> unknown_of(const std::vector<std::string>& prefix, const std::set<std::string>& alphabet) {
  std::vector<std::string> out;
  for (const auto& a : prefix)
    if (!alphabet.count(a) && std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
  return out;
}

std::optional<nlohmann::json> parse_body(std::string_view body) {
  if (body.empty()) return nlohmann::json::object();
  auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded()) return std::nullopt;
  return j;
}

std::optional<std::vector<std::string>> string_list(const nlohmann::json& j) {
  if (!j.is_array()) return std::nullopt;
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) return std::nullopt;
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

std::string recommendation_body(const RecommendationResult& result) { return result.to_json().dump(); }

Service::Service() = default;

Service::Service(ModelBundle model) { load(std::move(model)); }

Service::~Service() = default;

void Service::load(ModelBundle model) {
  auto l = std::make_shared<Loaded>();
  l->model = std::move(model);
  l->recommender = std::make_unique<Recommender>(l->model.tree, l->model.lambda, l->model.min_path_samples);
  l->path_count = extract_paths(l->model.tree).size();
  std::lock_guard lock(model_mutex_);
  loaded_ = std::move(l);
}

bool Service::loaded() const { return current() != nullptr; }

std::shared_ptr<const Service::Loaded> Service::current() const {
  std::lock_guard lock(model_mutex_);
  return loaded_;
}

std::shared_ptr<Service::Session> Service::find_session(const std::string& id) const {
  std::lock_guard lock(sessions_mutex_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

// Caller holds sessions_mutex_.
std::string Service::new_session_id() {
  if (id_state_ == 0) {
    std::random_device rd;
    id_state_ = (static_cast<std::uint64_t>(rd()) << 32) ^ rd() ^ 0x9E3779B97F4A7C15ull;
  }
  for (;;) {
    // splitmix64 step
    std::uint64_t z = (id_state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    z ^= z >> 31;
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(z));
    if (!sessions_.count(buf)) return buf;
  }
}

HttpResponse Service::handle(std::string_view method, std::string_view path, std::string_view body) {
  try {
    if (method == "OPTIONS") return {204, ""};
    if (path == "/model") {
      if (method != "GET") return error_response(405, "use GET");
      return get_model();
    }
    if (path == "/recommend") {
      if (method != "POST") return error_response(405, "use POST");
      return post_recommend(body);
    }
    if (path == "/sessions") {
      if (method != "POST") return error_response(405, "use POST");
      return post_session(body);
    }
    constexpr std::string_view prefix = "/sessions/";
    if (path.starts_with(prefix)) {
      std::string_view rest = path.substr(prefix.size());
      const auto slash = rest.find('/');
      const std::string id(rest.substr(0, slash));
      if (id.empty()) return error_response(404, "no such route");
      if (slash == std::string_view::npos) {
        if (method != "GET") return error_response(405, "use GET");
        return get_session(id);
      }
      if (rest.substr(slash) == "/events") {
        if (method != "POST") return error_response(405, "use POST");
        return post_event(id, body);
      }
    }
    return error_response(404, "no such route");
  } catch (const Error& e) {
    return error_response(e.kind() == ErrorKind::InvalidArgument ? 400 : 500, e.what());
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

HttpResponse Service::get_model() const {
  auto l = current();
  if (!l) return error_response(503, "no model loaded");
  const auto& m = l->model;
  nlohmann::json fams = nlohmann::json::array();
  for (Family f : m.families) fams.push_back(family_name(f));
  return json_response(200, {{"dataset", m.dataset_name},
                             {"trained_at", m.trained_at},
                             {"alphabet", m.alphabet},
                             {"families", fams},
                             {"lambda", m.lambda.to_json()},
                             {"th_fit", m.th_fit},
                             {"tree_depth", m.tree.depth()},
                             {"path_count", l->path_count},
                             {"positive_path_count", l->recommender->positive_paths().size()},
                             {"constraint_count", m.universe().size()},
                             {"min_path_samples", m.min_path_samples}});
}

HttpResponse Service::post_recommend(std::string_view body) const {
  auto l = current();
  if (!l) return error_response(503, "no model loaded");
  auto j = parse_body(body);
  if (!j || !j->is_object()) return error_response(400, "body must be a JSON object");
  if (!j->contains("activities")) return error_response(400, "missing 'activities'");
  auto activities = string_list(j->at("activities"));
  if (!activities) return error_response(400, "'activities' must be a list of strings");
  if (activities->empty()) return error_response(400, "empty prefix");

  const auto unknown = unknown_of(*activities, l->model.alphabet);
  try {
    auto result = l->recommender->generate(*activities);
    if (unknown.empty()) return {200, recommendation_body(result)};
    auto out = result.to_json();
    out["unknown_activities"] = unknown;
    return json_response(422, out);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoPositivePath) throw;
    nlohmann::json out{{"error", e.what()}};
    if (!unknown.empty()) out["unknown_activities"] = unknown;
    return json_response(409, out);
  }
}

HttpResponse Service::session_state(const Loaded& loaded, const Session& s) const {
  nlohmann::json out{{"id", s.id},
                     {"prefix", s.prefix},
                     {"length", s.prefix.size()},
                     {"created", s.created},
                     {"updated", s.updated},
                     {"unknown_activities", unknown_of(s.prefix, loaded.model.alphabet)},
                     {"result", nullptr}};
  if (s.prefix.empty()) return json_response(200, out);
  try {
    out["result"] = loaded.recommender->generate(s.prefix).to_json();
    return json_response(200, out);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoPositivePath) throw;
    out["error"] = e.what();
    return json_response(409, out);
  }
}

HttpResponse Service::post_session(std::string_view body) {
  auto l = current();
  if (!l) return error_response(503, "no model loaded");
  auto j = parse_body(body);
  if (!j || !j->is_object()) return error_response(400, "body must be a JSON object");
  auto s = std::make_shared<Session>();
  if (j->contains("activities")) {
    auto acts = string_list(j->at("activities"));
    if (!acts) return error_response(400, "'activities' must be a list of strings");
    s->prefix = std::move(*acts);
  }
  s->created = s->updated = now_string();
  {
    std::lock_guard lock(sessions_mutex_);
    s->id = new_session_id();
    sessions_.emplace(s->id, s);
  }
  std::lock_guard lock(s->mutex);
  HttpResponse r = session_state(*l, *s);
  if (r.status == 200) r.status = 201;
  return r;
}

HttpResponse Service::post_event(const std::string& id, std::string_view body) {
  auto l = current();
  if (!l) return error_response(503, "no model loaded");
  auto s = find_session(id);
  if (!s) return error_response(404, "unknown session '" + id + "'");
  auto j = parse_body(body);
  if (!j || !j->is_object() || !j->contains("activity") || !j->at("activity").is_string())
    return error_response(400, "body must be {\"activity\": string}");
  const auto activity = j->at("activity").get<std::string>();
  if (activity.empty()) return error_response(400, "empty activity");
  std::lock_guard lock(s->mutex);
  s->prefix.push_back(activity);
  s->updated = now_string();
  return session_state(*l, *s);
}

HttpResponse Service::get_session(const std::string& id) const {
  auto l = current();
  if (!l) return error_response(503, "no model loaded");
  auto s = find_session(id);
  if (!s) return error_response(404, "unknown session '" + id + "'");
  std::lock_guard lock(s->mutex);
  return session_state(*l, *s);
}

nlohmann::json Service::sessions_json() const {
  std::vector<std::shared_ptr<Session>> all;
  {
    std::lock_guard lock(sessions_mutex_);
    for (const auto& [id, s] : sessions_) all.push_back(s);
  }
  nlohmann::json out = nlohmann::json::array();
  for (const auto& s : all) {
    std::lock_guard lock(s->mutex);
    out.push_back({{"id", s->id}, {"prefix", s->prefix}, {"created", s->created}, {"updated", s->updated}});
  }
  return out;
}

void Service::set_snapshot_path(std::filesystem::path path) { snapshot_path_ = std::move(path); }

void Service::save_sessions() const {
  if (!snapshot_path_) return;
  std::ofstream out(*snapshot_path_, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write '" + snapshot_path_->string() + "'");
  out << sessions_json().dump(2) << '\n';
}

bool Service::serve(const std::string& host, int port) { return bind(host, port) > 0 && listen_bound(); }

int Service::bind(const std::string& host, int port) {
  auto handle_ptr = std::make_unique<ServerHandle>();
  auto& svr = handle_ptr->server;
  svr.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                           {"Access-Control-Allow-Headers", "Content-Type"}});
  auto adapt = [this](const httplib::Request& req, httplib::Response& res) {
    const HttpResponse r = handle(req.method, req.path, req.body);
    res.status = r.status;
    if (!r.body.empty()) res.set_content(r.body, "application/json");
  };
  svr.Get(".*", adapt);
  svr.Post(".*", adapt);
  svr.Options(".*", adapt);
  const int bound = port == 0 ? svr.bind_to_any_port(host) : (svr.bind_to_port(host, port) ? port : -1);
  if (bound <= 0) return -1;
  std::lock_guard lock(server_mutex_);
  server_ = std::move(handle_ptr);
  return bound;
}

bool Service::listen_bound() {
  httplib::Server* svr = nullptr;
  {
    std::lock_guard lock(server_mutex_);
    if (!server_) return false;
    svr = &server_->server;
  }
  return svr->listen_after_bind();
}

void Service::stop() {
  std::lock_guard lock(server_mutex_);
  if (server_) server_->server.stop();
}

}  // namespace ppm
