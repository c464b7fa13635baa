#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace rnnevo {

enum class CellType : std::uint8_t { simple, delta_rnn, gru, lstm, mgu, ugrnn };

inline constexpr std::array<CellType, 6> kAllCellTypes = {
    CellType::simple, CellType::delta_rnn, CellType::gru,
    CellType::lstm,   CellType::mgu,       CellType::ugrnn};

std::string_view to_string(CellType type);
std::optional<CellType> parse_cell_type(std::string_view name);

// Gated cells store one block per gate: the scalar applied to the summed
// feed-forward input, the scalar applied to the summed recurrent input, and
// the gate bias.
enum class GatePart : std::size_t { input = 0, recurrent = 1, bias = 2 };

enum class LstmGate : std::size_t { forget = 0, input = 1, candidate = 2, output = 3 };
enum class GruGate : std::size_t { update = 0, reset = 1, candidate = 2 };
enum class MguGate : std::size_t { forget = 0, candidate = 1 };
enum class UgrnnGate : std::size_t { candidate = 0, update = 1 };

template <typename Gate>
constexpr std::size_t gate_index(Gate gate, GatePart part) {
    return 3 * static_cast<std::size_t>(gate) + static_cast<std::size_t>(part);
}

namespace delta {
inline constexpr std::size_t alpha = 0;
inline constexpr std::size_t beta1 = 1;
inline constexpr std::size_t beta2 = 2;
inline constexpr std::size_t gate_bias = 3;  // b_j inside r_j
inline constexpr std::size_t memory = 4;     // m in e^v = m * s(t-1)
inline constexpr std::size_t bias = 5;       // bias inside the state proposal
}  // namespace delta

namespace simple {
inline constexpr std::size_t bias = 0;
}

/// Number of trainable scalars owned by a node of the given cell type.
constexpr std::size_t cell_param_count(CellType type) {
    switch (type) {
        case CellType::simple: return 1;
        case CellType::delta_rnn: return 6;
        case CellType::gru: return 9;
        case CellType::lstm: return 12;
        case CellType::mgu: return 6;
        case CellType::ugrnn: return 6;
    }
    return 0;
}

/// Fixed-capacity parameter block whose active length is determined by the
/// cell type. Unused trailing slots are always zero.
class CellParams {
public:
    static constexpr std::size_t kCapacity = 12;

    explicit CellParams(CellType type = CellType::simple) : type_(type) {}

    CellType type() const { return type_; }
    std::size_t size() const { return cell_param_count(type_); }

    std::span<double> values() { return {values_.data(), size()}; }
    std::span<const double> values() const { return {values_.data(), size()}; }

    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    bool operator==(const CellParams&) const = default;

private:
    CellType type_;
    std::array<double, kCapacity> values_{};
};

}  // namespace rnnevo
