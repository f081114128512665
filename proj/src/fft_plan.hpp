#pragma once

// Internal FFTW plumbing shared by the spectral and evolution layers.

#include <fftw3.h>

#include <cstddef>
#include <memory>
#include <vector>

#include "randns/spectral.hpp"

namespace randns::detail {

/// Per-thread real <-> half-complex transform pair on a G^N grid. Plans are made
/// on the workspace's own buffers with FFTW_ESTIMATE, so every thread executes the
/// same codelets and results do not depend on which worker ran a sample.
class FftWorkspace {
 public:
  FftWorkspace(int dim, int grid);
  ~FftWorkspace();
  FftWorkspace(const FftWorkspace&) = delete;
  FftWorkspace& operator=(const FftWorkspace&) = delete;

  double* real() { return real_; }
  fftw_complex* half() { return half_; }
  std::size_t real_size() const { return real_size_; }
  std::size_t half_size() const { return half_size_; }

  void backward() { fftw_execute(c2r_); }  // half -> real, unnormalized
  void forward() { fftw_execute(r2c_); }   // real -> half, unnormalized

  /// Workspace owned by the calling thread.
  static FftWorkspace& local(int dim, int grid);

 private:
  std::size_t real_size_ = 0;
  std::size_t half_size_ = 0;
  double* real_ = nullptr;
  fftw_complex* half_ = nullptr;
  fftw_plan c2r_ = nullptr;
  fftw_plan r2c_ = nullptr;
};

/// Index maps between the M^N coefficient box and the G^N half spectrum.
struct SpectralLayout {
  struct Slot {
    std::size_t mode;
    std::size_t half;
    bool conjugate;  // coefficient is conj(half[...]) of the partner -k
  };
  // Retained, non-Nyquist modes with k_last >= 0, for scattering into c2r input.
  std::vector<Slot> scatter;
  // Every retained non-Nyquist mode, for gathering r2c output.
  std::vector<Slot> gather;
  // Wavevector of every storage position.
  std::vector<WaveVector> wavevectors;

  static std::shared_ptr<const SpectralLayout> get(const TorusSpec& spec);
};

/// Scatter component a of f into ws.half() (zeroing the rest) and run c2r.
void component_to_grid(const VectorField& f, int a, FftWorkspace& ws,
                       const SpectralLayout& layout);

/// Run r2c on ws.real() and gather into out (scaled by 1/G^N); modes not gathered
/// (the Nyquist plane) are zeroed.
void grid_to_modes(FftWorkspace& ws, const SpectralLayout& layout, std::span<cplx> out);

}  // namespace randns::detail
