#include "pcc/hash.hpp"

#include "pcc/error.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>

namespace pcc {

namespace {

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
        EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr);
    }

    void update(std::string_view data) { EVP_DigestUpdate(ctx_.get(), data.data(), data.size()); }

    std::array<unsigned char, 32> digest() {
        std::array<unsigned char, 32> out{};
        unsigned int len = 0;
        EVP_DigestFinal_ex(ctx_.get(), out.data(), &len);
        return out;
    }

private:
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

std::string to_hex(const std::array<unsigned char, 32>& bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (unsigned char b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xF]);
    }
    return out;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
    Sha256 h;
    h.update(data);
    return to_hex(h.digest());
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::data_error, "cannot read " + path.string());
    Sha256 h;
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        h.update(std::string_view(buf.data(), static_cast<std::size_t>(in.gcount())));
    }
    return to_hex(h.digest());
}

std::string hash_fields(std::initializer_list<std::string_view> fields) {
    Sha256 h;
    for (auto f : fields) {
        std::string len = std::to_string(f.size());
        h.update(len);
        h.update(":");
        h.update(f);
    }
    return to_hex(h.digest());
}

std::uint64_t sub_seed(std::uint64_t master, std::string_view label) {
    Sha256 h;
    h.update(std::to_string(master));
    h.update("/");
    h.update(label);
    auto d = h.digest();
    std::uint64_t out = 0;
    for (int i = 0; i < 8; ++i) out = (out << 8) | d[static_cast<std::size_t>(i)];
    return out;
}

}  // namespace pcc
