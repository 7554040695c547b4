#pragma once

#include <string>
#include <string_view>

namespace parkocc::dataset {

/// Lowercase hex MD5 of key followed by data.
std::string generate_token(std::string_view key, std::string_view data);

/// Exactly 32 lowercase hex characters.
bool is_valid_token(std::string_view token);

/// Lowercase hex MD5 of raw bytes.
std::string md5_hex(std::string_view bytes);

}  // namespace parkocc::dataset
