#include "passbio/service.hpp"

#include <chrono>

#include <spdlog/spdlog.h>

namespace passbio {

Service::Service(Store& store, std::shared_ptr<spdlog::logger> log)
    : store_(store), log_(log ? std::move(log) : spdlog::default_logger()) {}

void Service::enroll(const std::string& id, tpe::MetricKind metric, tpe::Ciphertext ciphertext, PutMode mode) {
    validate_id(id);
    if (!ciphertext.c.is_square()) {
        throw tpe::InvalidParameter("ciphertext is not square");
    }
    const auto now = std::chrono::duration_cast<std::chrono::seconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
    EnrollmentRecord rec{id, metric, static_cast<std::int64_t>(now), std::move(ciphertext)};
    store_.put(rec, mode);
    if (mode == PutMode::Overwrite) {
        log_->info("enroll id={} metric={} replaced earlier records", id, tpe::to_string(metric));
    } else {
        log_->info("enroll id={} metric={}", id, tpe::to_string(metric));
    }
}

AuthResult Service::authenticate(const AuthRequest& req) const {
    const auto records = store_.get(req.id);
    bool accepted = false;
    for (const auto& rec : records) {
        if (rec->ciphertext.params_digest != req.token.params_digest) {
            log_->warn("auth id={} malformed token: setup digest differs from the enrolled record", req.id);
            continue;
        }
        if (rec->ciphertext.c.rows() != req.token.t.rows() || !req.token.t.is_square()) {
            log_->warn("auth id={} malformed token: dimension differs from the enrolled record", req.id);
            continue;
        }
        if (tpe::decrypt(rec->ciphertext, req.token, tpe::default_accept_when(rec->metric)).accept) {
            accepted = true;
            break;
        }
    }
    const Outcome outcome = accepted ? Outcome::Authenticated : Outcome::Denied;
    log_->info("auth id={} outcome={}", req.id, to_string(outcome));
    return AuthResult{outcome};
}

AuthResult Service::reject_malformed(const std::string& id, const std::string& reason) const {
    log_->warn("auth id={} malformed token: {}", id, reason);
    log_->info("auth id={} outcome={}", id, to_string(Outcome::Denied));
    return AuthResult{Outcome::Denied};
}

} // namespace passbio
