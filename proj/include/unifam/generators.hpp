#pragma once

// The generator vocabulary: the bilateral shift, a U(2) block acting on
// span{e0, e1}, and the projection P0 (only inside Kraus elements). Derived
// swaps and Kraus stages are built from these and nothing else.

#include <cstddef>
#include <functional>
#include <variant>
#include <vector>

#include "unifam/hilbert.hpp"

namespace unifam {

enum class Backend { Serial, OpenMP };

inline constexpr std::size_t kDefaultProgramCap = 1'000'000;
std::size_t program_cap() noexcept;
void set_program_cap(std::size_t cap);

using Mat2 = Eigen::Matrix2cd;

/// e^{i delta} [[cos(t/2), -e^{i lam} sin(t/2)], [e^{i phi} sin(t/2), e^{i(phi+lam)} cos(t/2)]]
struct U2Params {
  double theta = 0.0;
  double phi = 0.0;
  double lam = 0.0;
  double delta = 0.0;

  /// Same matrix, every angle in [0, 2pi).
  U2Params canonical() const;
  friend bool operator==(const U2Params&, const U2Params&) = default;
};

Mat2 u2_matrix(const U2Params& p);
/// Chart coordinates of a 2x2 unitary; u2_matrix(u2_params_from_matrix(m)) == m to rounding.
U2Params u2_params_from_matrix(const Mat2& m);
U2Params u2_adjoint(const U2Params& p);
/// diag(p, q) for unit-modulus p, q.
U2Params diagonal_u2(Complex p, Complex q);
/// The swap of e0 and e1: (pi, 0, pi, 0), materializing to [[0,1],[1,0]] exactly.
U2Params pi_op();

struct Shift {
  Index k = 0;
  friend bool operator==(const Shift&, const Shift&) = default;
};

struct U2At01 {
  U2Params params;
  friend bool operator==(const U2At01&, const U2At01&) = default;
};

using UnitaryOp = std::variant<Shift, U2At01>;

struct OpCounts {
  std::size_t u2 = 0;
  std::size_t shift = 0;
  std::size_t stage = 0;
  std::size_t total() const noexcept { return u2 + shift + stage; }
};

/// Word in the shift and U(2) generators, applied left to right.
class GeneratorSequence {
 public:
  GeneratorSequence() = default;
  /// Verbatim (no fusion); checks the program cap and shift bounds.
  explicit GeneratorSequence(std::vector<UnitaryOp> ops);

  const std::vector<UnitaryOp>& ops() const noexcept { return ops_; }
  std::size_t size() const noexcept { return ops_.size(); }
  bool empty() const noexcept { return ops_.empty(); }

  /// Appends with shift fusion: Shift(a), Shift(b) -> Shift(a+b); Shift(0) is dropped.
  void push_back(const UnitaryOp& op);
  void append(const GeneratorSequence& other);

  OpCounts counts() const;
  friend bool operator==(const GeneratorSequence&, const GeneratorSequence&) = default;

 private:
  std::vector<UnitaryOp> ops_;
};

/// sqrt(weight) * (P0 if project) * Pi_{0, swap_index}
struct KrausElement {
  double weight = 1.0;
  Index swap_index = 0;
  bool project = false;
  friend bool operator==(const KrausElement&, const KrausElement&) = default;
};

/// Operator-sum stage. With `complement` set, the extra element
/// I - sum_{i < elements.size()} |e_i><e_i| is appended.
struct KrausStage {
  std::vector<KrausElement> elements;
  bool complement = false;
  friend bool operator==(const KrausStage&, const KrausStage&) = default;
};

using ProgramItem = std::variant<Shift, U2At01, KrausStage>;

class ChannelProgram {
 public:
  ChannelProgram() = default;
  explicit ChannelProgram(std::vector<ProgramItem> items);

  const std::vector<ProgramItem>& items() const noexcept { return items_; }
  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }

  void push_back(const UnitaryOp& op);
  void push_back(const KrausStage& stage);
  void append(const GeneratorSequence& seq);

  bool is_unitary() const noexcept;
  /// The unitary-only contents; throws NotInvertible if a Kraus stage is present.
  GeneratorSequence as_sequence() const;
  OpCounts counts() const;
  friend bool operator==(const ChannelProgram&, const ChannelProgram&) = default;

 private:
  std::vector<ProgramItem> items_;
};

// Applying single ops --------------------------------------------------------

/// Shift changes only the offset. U2At01 extends the window to include 0 and 1.
StateVector apply_unitary(const StateVector& x, const UnitaryOp& op);
/// Conjugation rho -> U rho U^dagger.
DensityMatrix apply_unitary(const DensityMatrix& x, const UnitaryOp& op);

// Derived swaps --------------------------------------------------------------

/// [Shift(-n), U2(Pi), Shift(n)]: exchanges e_n and e_{n+1}.
GeneratorSequence pi_n_sequence(Index n);
/// Pi_k Pi_{k+1} ... Pi_{k+p-1} ... Pi_{k+1} Pi_k: exchanges e_k and e_{k+p}.
GeneratorSequence swap_chain_sequence(Index k, Index p);

// Dense forms ----------------------------------------------------------------

/// Dense restriction of the word to `window`. Throws ShiftLeak if any basis
/// vector of the window is carried outside it.
CMatrix materialize(const GeneratorSequence& seq, const Window& window,
                    Backend backend = Backend::OpenMP);
CMatrix materialize(const KrausElement& element, const Window& window);
/// Dense Kraus operators of the stage on `window`, complement last if present.
std::vector<CMatrix> materialize(const KrausStage& stage, const Window& window);

/// Smallest window containing `base` and every index the stage touches.
Window stage_window(const KrausStage& stage, const Window& base);
/// max-norm of sum_i K_i^dagger K_i - I on `window`.
double tp_residual(const KrausStage& stage, const Window& window);

DensityMatrix apply_kraus_stage(const DensityMatrix& rho, const KrausStage& stage,
                                Backend backend = Backend::OpenMP);

// Programs ------------------------------------------------------------------

/// Called after each item with (item index, resulting value).
using DensityObserver = std::function<void(std::size_t, const DensityMatrix&)>;

StateVector apply_program(const StateVector& x, const GeneratorSequence& seq);
/// Throws KrausOnState if the program holds a Kraus stage.
StateVector apply_program(const StateVector& x, const ChannelProgram& prog);
DensityMatrix apply_program(const DensityMatrix& x, const GeneratorSequence& seq);
DensityMatrix apply_program(const DensityMatrix& x, const ChannelProgram& prog,
                            const DensityObserver& observer = {},
                            Backend backend = Backend::OpenMP);

}  // namespace unifam
