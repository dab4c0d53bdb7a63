#pragma once

#include <filesystem>
#include <memory>
#include <string>

namespace rlhd {

struct ServiceOptions {
    std::string host = "127.0.0.1";
    /// 0 binds an ephemeral port.
    int port = 0;
    std::string cors_origin = "*";
};

// HTTP facade over one campaign directory. Holds the directory's writer lock for
// its lifetime. Endpoints:
//   GET  /state                   committed state snapshot
//   POST /step   {"index": i}     one stage-two step (1-based index)
//   POST /exit                    closes the campaign
//   GET  /events?after=s&wait=t   events with seq > s, long-polling up to t seconds
// Status codes: 400 malformed body, 409 step in flight or campaign closed,
// 422 index not a candidate, 500 evaluation failure.
class CampaignService {
public:
    CampaignService(std::filesystem::path dir, ServiceOptions options = {});
    ~CampaignService();
    CampaignService(const CampaignService&) = delete;
    CampaignService& operator=(const CampaignService&) = delete;

    /// Binds the socket; returns the bound port.
    int bind();
    /// Serves until stop() is called. Binds first if needed.
    void listen();
    /// Binds and serves on a background thread; returns the bound port.
    int start();
    void stop();
    int port() const noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace rlhd
