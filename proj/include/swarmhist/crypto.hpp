#pragma once

// Credential provisioning and the signature/hash primitives the history chain
// is built on. The defaults are Ed25519 signatures and SHA-256 digests
// (libsodium); both are deterministic, so provisioning and signing are pure
// functions of their inputs.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "swarmhist/bytes.hpp"

namespace swarmhist {

using RobotId = std::uint32_t;

inline constexpr std::size_t kDigestSize = 32;
inline constexpr std::size_t kPublicKeySize = 32;
inline constexpr std::size_t kSignatureSize = 64;

struct Digest {
  std::array<std::uint8_t, kDigestSize> bytes{};

  // All-zero digest; stands for the empty history before the first interval.
  static constexpr Digest genesis() noexcept { return Digest{}; }
  bool is_genesis() const noexcept { return *this == genesis(); }

  friend auto operator<=>(const Digest&, const Digest&) = default;
};

struct DigestHasher {
  std::size_t operator()(const Digest& d) const noexcept;
};

using PublicKey = std::array<std::uint8_t, kPublicKeySize>;

struct Credential {
  RobotId robot_id = 0;
  PublicKey verify_key{};
  Bytes cert;  // central-control signature over certificate_message()

  friend bool operator==(const Credential&, const Credential&) = default;
};

// Bytes the central control signs when certifying (robot_id, verify_key).
Bytes certificate_message(RobotId robot_id, const PublicKey& verify_key);

class SigningIdentity {
 public:
  SigningIdentity(Credential credential, const std::array<std::uint8_t, 64>& secret)
      : credential_(std::move(credential)), secret_(secret) {}

  const Credential& credential() const noexcept { return credential_; }
  RobotId id() const noexcept { return credential_.robot_id; }

  Bytes sign(ByteView message) const;

 private:
  Credential credential_;
  std::array<std::uint8_t, 64> secret_;  // never serialized
};

struct ProvisionedSwarm {
  PublicKey central_key{};
  std::vector<SigningIdentity> identities;  // identities[i].id() == i + 1
};

// Derives every key pair from `seed`; throws InvalidParameter when n == 0.
ProvisionedSwarm provision_swarm(std::size_t n, std::uint64_t seed);

Bytes sign(const SigningIdentity& identity, ByteView message);

// Malformed signatures (wrong length, non-canonical encodings) are rejected,
// never thrown.
bool verify(const Credential& credential, ByteView message, ByteView signature);
bool verify_with_key(const PublicKey& key, ByteView message, ByteView signature);
bool verify_certificate(const Credential& credential, const PublicKey& central_key);

Digest hash(ByteView message);

inline ByteView as_bytes(const Digest& d) noexcept { return ByteView(d.bytes); }

}  // namespace swarmhist
