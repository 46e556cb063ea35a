#pragma once

#include "fter/engine.hpp"

#include <chrono>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace httplib {
class Server;
}

namespace fter {

inline constexpr const char* task_question = "Do these two records refer to the same real-world entity?";

struct ServiceOptions {
    std::size_t max_outstanding{16};
    std::chrono::seconds task_ttl{300};
    /// A service that is not live only reports status; GET /task answers 409.
    bool live{true};
    std::function<std::chrono::steady_clock::time_point()> clock;
};

struct ServiceReply {
    int status{200};
    std::string body;  // JSON, empty for 204
};

/**
 * Live crowdsourcing loop over one engine: hands out the engine's next pairs
 * as tasks with ids, integrates each answer exactly once and expires tasks
 * nobody answered. All calls serialize on one mutex.
 */
class TaskService {
public:
    explicit TaskService(Engine engine, ServiceOptions options = {});

    ServiceReply get_task();
    ServiceReply post_answer(std::string_view body);
    ServiceReply status();

    std::size_t open_tasks();
    /// Every integrated answer in arrival order.
    std::vector<RecordedVote> answers();

    /// Runs `fn` on the engine under the service lock.
    template <typename Fn>
    auto inspect(Fn&& fn) {
        std::lock_guard lock(mutex_);
        return fn(static_cast<const Engine&>(engine_));
    }

private:
    struct OpenTask {
        Pair pair;
        std::chrono::steady_clock::time_point deadline;
    };

    std::chrono::steady_clock::time_point now() const;
    void expire();
    std::optional<Pair> next_pair();

    std::mutex mutex_;
    Engine engine_;
    ServiceOptions options_;
    std::map<std::string, OpenTask> open_;
    std::deque<Pair> batch_;
    std::uint64_t next_id_{1};
    std::vector<RecordedVote> answers_;
};

/// httplib front end: GET /task, POST /answer, GET /status, optional static files.
class HttpFrontend {
public:
    explicit HttpFrontend(TaskService& service, std::optional<std::filesystem::path> static_dir = std::nullopt);
    ~HttpFrontend();

    /// Binds `host:port` (0 picks a free port) and returns the bound port.
    int bind(const std::string& host, int port);
    /// Serves until `stop`.
    void run();
    void stop();

private:
    std::unique_ptr<httplib::Server> server_;
};

}  // namespace fter
