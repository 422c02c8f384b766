#include "passbio/record.hpp"

namespace passbio {

void validate_id(std::string_view id) {
    if (id.empty()) {
        throw tpe::InvalidParameter("id must not be empty");
    }
    if (id.size() > kMaxIdBytes) {
        throw tpe::InvalidParameter("id longer than " + std::to_string(kMaxIdBytes) + " bytes");
    }
}

PutMode put_mode_from_byte(std::uint8_t b) {
    if (b > static_cast<std::uint8_t>(PutMode::Overwrite)) {
        throw tpe::FormatError("unknown put mode " + std::to_string(b));
    }
    return static_cast<PutMode>(b);
}

const char* to_string(Outcome o) {
    return o == Outcome::Authenticated ? "Authenticated" : "Denied";
}

} // namespace passbio
