#include "groundchat/access.hpp"

#include <sodium.h>

#include "groundchat/engine.hpp"
#include "groundchat/error.hpp"
#include "groundchat/utf8.hpp"

namespace groundchat::access {

namespace {

void ensure_sodium() {
    static const bool ready = sodium_init() >= 0;
    if (!ready) throw Error(ErrorCode::internal, "crypto library failed to initialise");
}

std::array<unsigned char, 32> digest_of(std::string_view passphrase, const std::array<unsigned char, 16>& salt) {
    std::array<unsigned char, 32> out{};
    crypto_generichash_state state;
    crypto_generichash_init(&state, salt.data(), salt.size(), out.size());
    crypto_generichash_update(&state, reinterpret_cast<const unsigned char*>(passphrase.data()), passphrase.size());
    crypto_generichash_final(&state, out.data(), out.size());
    return out;
}

}  // namespace

std::string_view to_string(Role role) { return role == Role::owner ? "owner" : "learner"; }

AccessPolicy AccessPolicy::create(std::string_view passphrase, Timestamp not_before, Timestamp not_after) {
    if (not_before >= not_after) throw Error(ErrorCode::bad_window, "not_before must be earlier than not_after");
    if (utf8::length(passphrase) < kMinPassphraseChars) {
        throw Error(ErrorCode::weak_passphrase,
                    "passphrase needs at least " + std::to_string(kMinPassphraseChars) + " characters");
    }
    ensure_sodium();
    AccessPolicy p;
    randombytes_buf(p.salt.data(), p.salt.size());
    p.digest = digest_of(passphrase, p.salt);
    p.not_before = not_before;
    p.not_after = not_after;
    return p;
}

bool AccessPolicy::matches(std::string_view passphrase) const {
    ensure_sodium();
    const auto d = digest_of(passphrase, salt);
    return sodium_memcmp(d.data(), digest.data(), d.size()) == 0;
}

ShareInfo ShareRegistry::share(const std::string& session_id, std::string_view passphrase, Timestamp not_before,
                               Timestamp not_after) {
    auto policy = AccessPolicy::create(passphrase, not_before, not_after);
    std::lock_guard lock(mutex_);
    std::string token;
    do {
        token = "t" + engine::random_hex_id();
    } while (shares_.count(token));
    shares_.emplace(token, Share{session_id, policy});
    return {token, not_before, not_after};
}

bool ShareRegistry::is_token(const std::string& id) const {
    std::lock_guard lock(mutex_);
    return shares_.count(id) > 0;
}

Grant ShareRegistry::authorize(const std::string& token, std::string_view passphrase) const {
    Share share;
    {
        std::lock_guard lock(mutex_);
        auto it = shares_.find(token);
        if (it == shares_.end()) throw Error(ErrorCode::unknown_session, "unknown session or share link");
        share = it->second;
    }
    if (!share.policy.within(clock_->now())) {
        throw Error(ErrorCode::outside_window, "this share link is not open at the current time");
    }
    if (!share.policy.matches(passphrase)) throw Error(ErrorCode::bad_passphrase, "wrong passphrase");
    return {share.session_id, Role::learner, token};
}

}  // namespace groundchat::access
