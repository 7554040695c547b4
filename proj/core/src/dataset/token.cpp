#include "parkocc/dataset/token.hpp"

#include <openssl/evp.h>

#include <array>
#include <memory>

#include "parkocc/error.hpp"

namespace parkocc::dataset {

namespace {

std::string hex(const unsigned char* p, unsigned n) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(2 * n, '0');
  for (unsigned i = 0; i < n; ++i) {
    out[2 * i] = kDigits[p[i] >> 4];
    out[2 * i + 1] = kDigits[p[i] & 0xF];
  }
  return out;
}

struct CtxDeleter {
  void operator()(EVP_MD_CTX* c) const { EVP_MD_CTX_free(c); }
};

std::string md5_parts(std::string_view a, std::string_view b) {
  std::unique_ptr<EVP_MD_CTX, CtxDeleter> ctx(EVP_MD_CTX_new());
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_md5(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), a.data(), a.size()) != 1 ||
      EVP_DigestUpdate(ctx.get(), b.data(), b.size()) != 1) {
    throw Error("dataset", "md5 digest failed");
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned len = 0;
  if (EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1) {
    throw Error("dataset", "md5 digest failed");
  }
  return hex(md.data(), len);
}

}  // namespace

std::string generate_token(std::string_view key, std::string_view data) {
  return md5_parts(key, data);
}

std::string md5_hex(std::string_view bytes) { return md5_parts(bytes, {}); }

bool is_valid_token(std::string_view token) {
  if (token.size() != 32) return false;
  for (char c : token) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

}  // namespace parkocc::dataset
