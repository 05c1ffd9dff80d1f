#include "swarmhist/crypto.hpp"

#include <sodium.h>

#include <cstring>
#include <stdexcept>
#include <string_view>

#include "swarmhist/error.hpp"

namespace swarmhist {

namespace {

void ensure_sodium() {
  static const int status = sodium_init();
  if (status < 0) throw std::runtime_error("libsodium initialisation failed");
}

constexpr std::string_view kCertDomain = "swarmhist/cert/v1";
constexpr std::string_view kKeyDomain = "swarmhist/key/v1";

struct KeyPair {
  PublicKey pk{};
  std::array<std::uint8_t, 64> sk{};
};

// Seed for key `index` (0 = central control) is SHA-256(domain || seed || index).
KeyPair derive_keypair(std::uint64_t seed, std::uint32_t index) {
  ByteWriter w;
  w.raw(ByteView(reinterpret_cast<const std::uint8_t*>(kKeyDomain.data()), kKeyDomain.size()));
  w.u64(seed);
  w.u32(index);
  const Digest key_seed = hash(w.bytes());
  KeyPair kp;
  crypto_sign_seed_keypair(kp.pk.data(), kp.sk.data(), key_seed.bytes.data());
  return kp;
}

Bytes detached_sign(const std::array<std::uint8_t, 64>& sk, ByteView message) {
  Bytes sig(crypto_sign_BYTES);
  crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(), sk.data());
  return sig;
}

}  // namespace

std::size_t DigestHasher::operator()(const Digest& d) const noexcept {
  std::size_t h = 0;
  std::memcpy(&h, d.bytes.data(), sizeof(h));
  return h;
}

Bytes certificate_message(RobotId robot_id, const PublicKey& verify_key) {
  ByteWriter w;
  w.raw(ByteView(reinterpret_cast<const std::uint8_t*>(kCertDomain.data()), kCertDomain.size()));
  w.u32(robot_id);
  w.raw(verify_key);
  return std::move(w).take();
}

Bytes SigningIdentity::sign(ByteView message) const {
  ensure_sodium();
  return detached_sign(secret_, message);
}

ProvisionedSwarm provision_swarm(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidParameter("swarm must contain at least one robot", "n");
  if (n > 0xffffffffu - 1) throw InvalidParameter("robot count too large", "n");
  ensure_sodium();

  const KeyPair central = derive_keypair(seed, 0);
  ProvisionedSwarm swarm;
  swarm.central_key = central.pk;
  swarm.identities.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) {
    const auto id = static_cast<RobotId>(i);
    const KeyPair kp = derive_keypair(seed, id);
    Credential cred{id, kp.pk, detached_sign(central.sk, certificate_message(id, kp.pk))};
    swarm.identities.emplace_back(std::move(cred), kp.sk);
  }
  return swarm;
}

Bytes sign(const SigningIdentity& identity, ByteView message) { return identity.sign(message); }

bool verify_with_key(const PublicKey& key, ByteView message, ByteView signature) {
  ensure_sodium();
  if (signature.size() != crypto_sign_BYTES) return false;
  return crypto_sign_verify_detached(signature.data(), message.data(), message.size(), key.data()) == 0;
}

bool verify(const Credential& credential, ByteView message, ByteView signature) {
  return verify_with_key(credential.verify_key, message, signature);
}

bool verify_certificate(const Credential& credential, const PublicKey& central_key) {
  return verify_with_key(central_key, certificate_message(credential.robot_id, credential.verify_key),
                         credential.cert);
}

Digest hash(ByteView message) {
  ensure_sodium();
  Digest d;
  crypto_hash_sha256(d.bytes.data(), message.data(), message.size());
  return d;
}

}  // namespace swarmhist
