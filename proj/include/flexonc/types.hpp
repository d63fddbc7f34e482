#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace flexonc {

/*------------------------------------------------------------------------------------------------*/

/// Thrown when a caller breaks a documented precondition.
class PreconditionError : public std::logic_error
{
public:
  using std::logic_error::logic_error;
};

/// Thrown when a routing or neighbour lookup has no answer.
class LookupError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Thrown for invalid scenario or run configuration. Carries the offending field path.
class ConfigError : public std::runtime_error
{
public:
  ConfigError(std::string field, const std::string& what)
    : std::runtime_error(field.empty() ? what : field + ": " + what)
    , field_{std::move(field)}
  {}

  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

/*------------------------------------------------------------------------------------------------*/

/// Node index. The total order on indexes is the network-wide ranking order.
struct NodeId
{
  std::uint32_t index = std::numeric_limits<std::uint32_t>::max();

  constexpr NodeId() = default;
  constexpr explicit NodeId(std::uint32_t i) : index{i} {}

  constexpr bool valid() const noexcept { return index != std::numeric_limits<std::uint32_t>::max(); }
  constexpr auto operator<=>(const NodeId&) const = default;
};

inline constexpr NodeId no_node{};

std::string to_string(NodeId n);

struct FlowId
{
  NodeId source;
  NodeId destination;
  std::uint32_t number = 0;

  constexpr auto operator<=>(const FlowId&) const = default;
};

struct PacketId
{
  FlowId flow;
  std::uint64_t sequence = 0;

  constexpr auto operator<=>(const PacketId&) const = default;
};

std::string to_string(const PacketId& id);

/*------------------------------------------------------------------------------------------------*/

struct NativePacket
{
  PacketId id;
  NodeId previous_hop;                // no_node at the source: nobody has heard it yet
  NodeId next_hop;
  std::size_t payload_bytes = 0;
  /// Arrived inside a coded frame and was recovered here.
  bool decoded_native = false;
  /// Transmitter of the coded frame this packet was decoded from.
  std::optional<NodeId> origin_coded_previous_hop;
  bool suspect = false;
  double birth_time = 0.0;

  /// Previous hop as seen by the coding rules: the coded transmitter for decoded natives.
  NodeId coding_previous_hop() const noexcept
  {
    return decoded_native && origin_coded_previous_hop ? *origin_coded_previous_hop : previous_hop;
  }
};

struct CodedPartner
{
  PacketId id;
  NodeId next_hop;
};

struct CodedHeader
{
  std::vector<CodedPartner> partners;
  /// One bit per node in the network; set bits are eligible non-intended forwarders.
  std::vector<bool> eligible;

  std::size_t partner_count() const noexcept { return partners.size(); }
  std::vector<NodeId> eligible_nodes() const;
  bool is_eligible(NodeId n) const noexcept
  {
    return n.index < eligible.size() && eligible[n.index];
  }
  /// Position (0-based) of `n` in the next-hop list.
  std::optional<std::size_t> next_hop_position(NodeId n) const noexcept;
};

inline constexpr std::size_t max_coding_partners = 4;

struct CodedPacket
{
  CodedHeader header;
  NodeId sender;
  std::size_t payload_bytes = 0;
  /// Simulator stand-in for the XOR bitstream: the natives that were mixed, in header order.
  std::vector<NativePacket> natives;

  std::set<PacketId> payload_ids() const;
  /// Checks the structural invariants of header and payload; throws PreconditionError.
  void validate() const;
};

enum class AckKind { ack, nack };

struct Acknowledgment
{
  AckKind kind = AckKind::ack;
  NodeId sender;
  PacketId acked;
};

/*------------------------------------------------------------------------------------------------*/

/// Returns the single partner missing from `known`, or nothing when zero or several are missing.
std::optional<PacketId> xor_decode(const CodedPacket& coded, const std::set<PacketId>& known);

/// Rank of `receiver` among backup forwarders of `decoded_partner`. Rank 1 is the partner's
/// intended forwarder; bitmap nodes follow in ascending index order.
unsigned rank_of(NodeId receiver, const CodedHeader& header, const PacketId& decoded_partner);

} // namespace flexonc

template <>
struct std::hash<flexonc::NodeId>
{
  std::size_t operator()(const flexonc::NodeId& n) const noexcept { return n.index; }
};

template <>
struct std::hash<flexonc::PacketId>
{
  std::size_t operator()(const flexonc::PacketId& p) const noexcept
  {
    std::size_t h = p.flow.source.index;
    h = h * 1000003u ^ p.flow.destination.index;
    h = h * 1000003u ^ p.flow.number;
    h = h * 1000003u ^ static_cast<std::size_t>(p.sequence);
    return h;
  }
};
