#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <mutex>
#include <string>
#include <string_view>

#include "groundchat/clock.hpp"

namespace groundchat::access {

inline constexpr std::size_t kMinPassphraseChars = 4;

// Salted BLAKE2b digest of a passphrase plus the time window in which a
// share token is valid. The plaintext is never stored.
struct AccessPolicy {
    std::array<unsigned char, 16> salt{};
    std::array<unsigned char, 32> digest{};
    Timestamp not_before = 0;
    Timestamp not_after = 0;

    // Throws Error(bad_window) unless not_before < not_after and
    // Error(weak_passphrase) for fewer than four characters.
    static AccessPolicy create(std::string_view passphrase, Timestamp not_before, Timestamp not_after);

    bool within(Timestamp t) const noexcept { return not_before <= t && t <= not_after; }
    // Constant-time comparison.
    bool matches(std::string_view passphrase) const;
};

enum class Role { owner, learner };

std::string_view to_string(Role role);

struct Grant {
    std::string session_id;
    Role role = Role::owner;
    std::string token;  // empty for owners
};

struct ShareInfo {
    std::string token;
    Timestamp not_before = 0;
    Timestamp not_after = 0;
};

// Share tokens and their policies.
class ShareRegistry {
public:
    explicit ShareRegistry(const Clock& clock) : clock_(&clock) {}

    ShareInfo share(const std::string& session_id, std::string_view passphrase, Timestamp not_before,
                    Timestamp not_after);

    bool is_token(const std::string& id) const;

    // Learner grant for a token. Throws Error(unknown_session) for an
    // unknown token, Error(outside_window) before evaluating the passphrase,
    // then Error(bad_passphrase).
    Grant authorize(const std::string& token, std::string_view passphrase) const;

private:
    struct Share {
        std::string session_id;
        AccessPolicy policy;
    };
    const Clock* clock_;
    mutable std::mutex mutex_;
    std::map<std::string, Share> shares_;
};

}  // namespace groundchat::access
