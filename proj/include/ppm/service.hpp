#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ppm/model.hpp"

namespace ppm {

struct HttpResponse {
  int status = 200;
  std::string body;
};

/// HTTP front end over one immutable model. `handle` is the whole request
/// logic and needs no socket; `serve` only adapts it to cpp-httplib.
class Service {
public:
  Service();
  explicit Service(ModelBundle model);
  ~Service();

  void load(ModelBundle model);
  bool loaded() const;

  HttpResponse handle(std::string_view method, std::string_view path, std::string_view body);

  /// Blocks until stop() is called. Returns false if the port could not be bound.
  bool serve(const std::string& host, int port);
  /// Binds without accepting yet; port 0 picks a free port. Returns the bound port, or -1.
  int bind(const std::string& host, int port);
  /// Accepts on the socket from bind() until stop() is called.
  bool listen_bound();
  void stop();

  /// Sessions are written here by save_sessions(); nothing is written when unset.
  void set_snapshot_path(std::filesystem::path path);
  void save_sessions() const;
  nlohmann::json sessions_json() const;

private:
  struct Loaded {
    ModelBundle model;
    std::unique_ptr<Recommender> recommender;
    std::size_t path_count = 0;
  };
  struct Session {
    mutable std::mutex mutex;
    std::string id;
    std::vector<std::string> prefix;
    std::string created;
    std::string updated;
  };

  std::shared_ptr<const Loaded> current() const;
  std::shared_ptr<Session> find_session(const std::string& id) const;
  std::string new_session_id();

  HttpResponse get_model() const;
  HttpResponse post_recommend(std::string_view body) const;
  HttpResponse post_session(std::string_view body);
  HttpResponse post_event(const std::string& id, std::string_view body);
  HttpResponse get_session(const std::string& id) const;
  HttpResponse session_state(const Loaded& loaded, const Session& s) const;

  mutable std::mutex model_mutex_;
  std::shared_ptr<const Loaded> loaded_;

  mutable std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t id_state_ = 0;

  std::optional<std::filesystem::path> snapshot_path_;
  struct ServerHandle;
  std::unique_ptr<ServerHandle> server_;
  std::mutex server_mutex_;
};

/// Body of a successful /recommend call: the in-process result as compact JSON.
std::string recommendation_body(const RecommendationResult& result);

}  // namespace ppm
