#pragma once

#include <chrono>
#include <map>
#include <mutex>
#include <string>
#include <thread>

#include "groundchat/error.hpp"
#include "groundchat/ingest.hpp"

namespace groundchat::testing {

// Serves canned documents by URL; unknown URLs answer like a 404.
class FakeFetcher final : public ingest::Fetcher {
public:
    void put(const std::string& url, std::string body, ingest::Media media = ingest::Media::html,
             std::chrono::milliseconds delay = std::chrono::milliseconds(0)) {
        std::lock_guard lock(mutex_);
        pages_[url] = {std::move(body), media, delay};
    }

    ingest::RawDocument fetch(const std::string& url) override {
        Page page;
        {
            std::lock_guard lock(mutex_);
            ++fetches_;
            auto it = pages_.find(url);
            if (it == pages_.end()) throw Error(ErrorCode::fetch_status, "HTTP 404 for " + url).with_status(404);
            page = it->second;
        }
        if (page.delay.count() > 0) std::this_thread::sleep_for(page.delay);
        return {"", page.media, page.body};
    }

    int fetches() const {
        std::lock_guard lock(mutex_);
        return fetches_;
    }

private:
    struct Page {
        std::string body;
        ingest::Media media = ingest::Media::html;
        std::chrono::milliseconds delay{0};
    };
    mutable std::mutex mutex_;
    std::map<std::string, Page> pages_;
    int fetches_ = 0;
};

}  // namespace groundchat::testing
