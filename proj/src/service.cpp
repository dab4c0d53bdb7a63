#include "rlhd/service.hpp"

#include <chrono>
#include <condition_variable>
#include <mutex>
#include <thread>
#include <vector>

#include "httplib.h"
#include "rlhd/campaign.hpp"
#include "rlhd/error.hpp"

namespace rlhd {

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

json error_body(const std::string& code, const std::string& message) {
    return json{{"error", code}, {"message", message}};
}

}  // namespace

struct CampaignService::Impl {
    ServiceOptions options;
    CampaignStore store;
    httplib::Server server;
    std::thread thread;
    int port = -1;

    std::mutex step_mutex;

    std::mutex snapshot_mutex;
    std::shared_ptr<const std::string> snapshot;

    std::mutex events_mutex;
    std::condition_variable events_cv;
    std::vector<json> events;

    Impl(std::filesystem::path dir, ServiceOptions opts) : options(std::move(opts)), store(std::move(dir)) {
        events = CampaignStore::read_events(store.dir());
        store.add_listener([this](const CampaignEvent& e) {
            {
                std::lock_guard lock(events_mutex);
                events.push_back(event_to_json(e));
            }
            events_cv.notify_all();
        });
        publish();
        routes();
    }

    void publish() {
        auto s = std::make_shared<const std::string>(to_json(store.campaign().state()).dump());
        std::lock_guard lock(snapshot_mutex);
        snapshot = std::move(s);
    }

    std::shared_ptr<const std::string> current() {
        std::lock_guard lock(snapshot_mutex);
        return snapshot;
    }

    void routes() {
        const std::string origin = options.cors_origin;
        server.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
            res.set_header("Access-Control-Allow-Origin", origin);
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
        });
        server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

        server.Get("/state", [this](const httplib::Request&, httplib::Response& res) {
            res.status = 200;
            res.set_content(*current(), "application/json");
        });

        server.Post("/step", [this](const httplib::Request& req, httplib::Response& res) { step(req, res); });
        server.Post("/exit", [this](const httplib::Request& req, httplib::Response& res) { exit(req, res); });
        server.Get("/events", [this](const httplib::Request& req, httplib::Response& res) { poll(req, res); });
    }

    void step(const httplib::Request& req, httplib::Response& res) {
        const json body = json::parse(req.body, nullptr, false);
        if (body.is_discarded() || !body.is_object() || !body.contains("index") || !body["index"].is_number_integer()) {
            send_json(res, 400, error_body("bad_request", "expected a JSON body {\"index\": <1-based input>}"));
            return;
        }
        const long long index = body["index"].get<long long>();
        std::unique_lock lock(step_mutex, std::try_to_lock);
        if (!lock.owns_lock()) {
            send_json(res, 409, error_body("step_in_flight", "another step is running"));
            return;
        }
        Campaign& c = store.campaign();
        if (c.state().stage == Stage::closed) {
            send_json(res, 409, error_body("closed", "campaign is closed"));
            return;
        }
        const auto cands = c.candidates();
        if (index < 1 || std::find(cands.begin(), cands.end(), static_cast<std::size_t>(index - 1)) == cands.end()) {
            send_json(res, 422, error_body("not_a_candidate", "input " + std::to_string(index) + " is not a candidate"));
            return;
        }
        try {
            c.stage_two_step(static_cast<std::size_t>(index - 1), "human");
            store.commit();
        } catch (const Error& e) {
            store.commit();
            publish();
            send_json(res, e.kind() == ErrorKind::precondition ? 422 : 500, error_body(to_string(e.kind()), e.what()));
            return;
        }
        publish();
        res.status = 200;
        res.set_content(*current(), "application/json");
    }

    void exit(const httplib::Request& req, httplib::Response& res) {
        std::string reason = "exit requested";
        if (!req.body.empty()) {
            const json body = json::parse(req.body, nullptr, false);
            if (body.is_discarded() || !body.is_object()) {
                send_json(res, 400, error_body("bad_request", "expected an empty body or a JSON object"));
                return;
            }
            reason = body.value("reason", reason);
        }
        std::unique_lock lock(step_mutex, std::try_to_lock);
        if (!lock.owns_lock()) {
            send_json(res, 409, error_body("step_in_flight", "another step is running"));
            return;
        }
        Campaign& c = store.campaign();
        if (c.state().stage == Stage::closed) {
            send_json(res, 409, error_body("closed", "campaign is closed"));
            return;
        }
        c.close("human", reason);
        store.commit();
        publish();
        res.status = 200;
        res.set_content(*current(), "application/json");
    }

    void poll(const httplib::Request& req, httplib::Response& res) {
        std::size_t after = 0;
        double wait = 0.0;
        try {
            if (req.has_param("after")) after = std::stoull(req.get_param_value("after"));
            if (req.has_param("wait")) wait = std::stod(req.get_param_value("wait"));
        } catch (const std::exception&) {
            send_json(res, 400, error_body("bad_request", "after and wait must be numbers"));
            return;
        }
        wait = std::clamp(wait, 0.0, 60.0);
        auto newer = [&] {
            json out = json::array();
            for (const json& e : events)
                if (e.value("seq", std::size_t{0}) > after) out.push_back(e);
            return out;
        };
        std::unique_lock lock(events_mutex);
        json out = newer();
        if (out.empty() && wait > 0.0) {
            events_cv.wait_for(lock, std::chrono::duration<double>(wait), [&] {
                return !events.empty() && events.back().value("seq", std::size_t{0}) > after;
            });
            out = newer();
        }
        const std::size_t last = events.empty() ? 0 : events.back().value("seq", std::size_t{0});
        send_json(res, 200, json{{"events", out}, {"last_seq", last}});
    }
};

CampaignService::CampaignService(std::filesystem::path dir, ServiceOptions options)
    : impl_(std::make_unique<Impl>(std::move(dir), std::move(options))) {}

CampaignService::~CampaignService() { stop(); }

int CampaignService::bind() {
    if (impl_->port > 0) return impl_->port;
    if (impl_->options.port == 0)
        impl_->port = impl_->server.bind_to_any_port(impl_->options.host);
    else
        impl_->port = impl_->server.bind_to_port(impl_->options.host, impl_->options.port) ? impl_->options.port : -1;
    if (impl_->port <= 0) throw ConfigurationError("cannot bind " + impl_->options.host + ":" + std::to_string(impl_->options.port));
    return impl_->port;
}

void CampaignService::listen() {
    bind();
    impl_->server.listen_after_bind();
}

int CampaignService::start() {
    const int p = bind();
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return p;
}

void CampaignService::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

int CampaignService::port() const noexcept { return impl_->port; }

}  // namespace rlhd
