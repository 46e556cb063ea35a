#include "fter/task_service.hpp"

#include <httplib.h>
#include <json.hpp>

namespace fter {

namespace {

using nlohmann::json;

ServiceReply error_reply(int status, const std::string& message) {
    return {status, json{{"error", message}}.dump()};
}

json record_json(const Record& r) {
    return {{"id", r.id}, {"payload", r.payload ? json(*r.payload) : json(nullptr)}};
}

}  // namespace

TaskService::TaskService(Engine engine, ServiceOptions options)
    : engine_(std::move(engine)), options_(std::move(options)) {
    if (options_.max_outstanding == 0) throw ConfigError("max_outstanding must be >= 1");
    if (options_.task_ttl.count() <= 0) throw ConfigError("task ttl must be positive");
}

std::chrono::steady_clock::time_point TaskService::now() const {
    return options_.clock ? options_.clock() : std::chrono::steady_clock::now();
}

void TaskService::expire() {
    const auto t = now();
    for (auto it = open_.begin(); it != open_.end();) {
        if (it->second.deadline <= t) {
            engine_.withdraw(it->second.pair);
            it = open_.erase(it);
        } else {
            ++it;
        }
    }
}

std::optional<Pair> TaskService::next_pair() {
    if (!engine_.config().batched) return engine_.next_task();
    if (batch_.empty()) {
        for (const auto& item : engine_.next_batch().items)
            for (Score k = 0; k < item.repeats; ++k) batch_.push_back(item.pair);
    }
    if (batch_.empty()) return std::nullopt;
    const auto p = batch_.front();
    batch_.pop_front();
    return p;
}

ServiceReply TaskService::get_task() {
    std::lock_guard lock(mutex_);
    if (!options_.live) return error_reply(409, "engine is not live");
    expire();
    if (open_.size() >= options_.max_outstanding) return {204, ""};
    const auto pair = next_pair();
    if (!pair) return {204, ""};
    const auto id = "t" + std::to_string(next_id_++);
    open_.emplace(id, OpenTask{*pair, now() + options_.task_ttl});
    const auto& g = engine_.graph();
    const json body{{"task_id", id},
                    {"records", {record_json(g.record(pair->first)), record_json(g.record(pair->second))}},
                    {"question", task_question}};
    return {200, body.dump()};
}

ServiceReply TaskService::post_answer(std::string_view body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception&) {
        return error_reply(400, "body is not valid JSON");
    }
    if (!j.is_object() || !j.contains("task_id") || !j["task_id"].is_string())
        return error_reply(400, "missing string 'task_id'");
    if (!j.contains("answer") || !j["answer"].is_string()) return error_reply(400, "missing string 'answer'");
    if (!j.contains("worker_id") || !j["worker_id"].is_string())
        return error_reply(400, "missing string 'worker_id'");
    const auto text = j["answer"].get<std::string>();
    if (text != "yes" && text != "no") return error_reply(400, "answer must be 'yes' or 'no'");
    const auto answer = text == "yes" ? Answer::yes : Answer::no;
    const auto id = j["task_id"].get<std::string>();

    std::lock_guard lock(mutex_);
    expire();
    auto it = open_.find(id);
    if (it == open_.end()) return error_reply(410, "task '" + id + "' is not open");
    const auto pair = it->second.pair;
    open_.erase(it);
    engine_.integrate(pair, answer);
    answers_.push_back({pair, j["worker_id"].get<std::string>(), answer, answers_.size()});
    return {200, json{{"task_id", id}, {"cost", engine_.cost()}}.dump()};
}

ServiceReply TaskService::status() {
    std::lock_guard lock(mutex_);
    expire();
    json body{{"cost", engine_.cost()},
              {"clusters", engine_.clustering().clusters().size()},
              {"open_tasks", open_.size()},
              {"finished", engine_.finished()}};
    if (const auto m = engine_.metrics()) {
        body["precision"] = m->precision;
        body["recall"] = m->recall;
        body["f"] = m->f_measure;
    }
    return {200, body.dump()};
}

std::size_t TaskService::open_tasks() {
    std::lock_guard lock(mutex_);
    expire();
    return open_.size();
}

std::vector<RecordedVote> TaskService::answers() {
    std::lock_guard lock(mutex_);
    return answers_;
}

HttpFrontend::HttpFrontend(TaskService& service, std::optional<std::filesystem::path> static_dir)
    : server_(std::make_unique<httplib::Server>()) {
    auto send = [](httplib::Response& res, const ServiceReply& r) {
        res.status = r.status;
        if (!r.body.empty()) res.set_content(r.body, "application/json");
    };
    server_->Get("/task", [&service, send](const httplib::Request&, httplib::Response& res) {
        send(res, service.get_task());
    });
    server_->Post("/answer", [&service, send](const httplib::Request& req, httplib::Response& res) {
        send(res, service.post_answer(req.body));
    });
    server_->Get("/status", [&service, send](const httplib::Request&, httplib::Response& res) {
        send(res, service.status());
    });
    if (static_dir && !server_->set_mount_point("/", static_dir->string()))
        throw ConfigError("static directory not found: " + static_dir->string());
}

HttpFrontend::~HttpFrontend() { stop(); }

int HttpFrontend::bind(const std::string& host, int port) {
    const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw ConfigError("cannot bind " + host + ":" + std::to_string(port));
    return bound;
}

void HttpFrontend::run() { server_->listen_after_bind(); }

void HttpFrontend::stop() {
    if (server_) server_->stop();
}

}  // namespace fter
