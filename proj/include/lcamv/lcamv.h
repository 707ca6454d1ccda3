/*
 * lcamv — structured-light 3D reconstruction with per-channel lateral
 * chromatic aberration correction and minimum-variance RGB fusion.
 *
 * C interface of the shared library. All functions return LCAMV_OK on
 * success; on failure they return a status code and leave a human-readable
 * message in lcamv_last_error() (thread-local). Opaque handles own their
 * resources and are released with the matching _free call.
 */
#ifndef LCAMV_H
#define LCAMV_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LCAMV_API __declspec(dllexport)
#else
#define LCAMV_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lcamv_status {
  LCAMV_OK = 0,
  LCAMV_E_INVALID_ARGUMENT = 1,
  LCAMV_E_IO = 2,
  LCAMV_E_PARSE = 3,
  LCAMV_E_DEGENERATE = 4,            /* degenerate geometry / baseline / levels */
  LCAMV_E_MISSING_CALIBRATION = 5,
  LCAMV_E_NO_CONVERGENCE = 6,
  LCAMV_E_INTERNAL = 7
} lcamv_status;

LCAMV_API const char* lcamv_status_name(lcamv_status status);

/* Message describing the most recent failure on this thread ("" if none). */
LCAMV_API const char* lcamv_last_error(void);

LCAMV_API const char* lcamv_version(void);

/* Worker threads for raster loops; 0 = auto. Results are identical for any
 * thread count. The LCAMV_THREADS environment variable sets the default. */
LCAMV_API void lcamv_set_threads(int n);

/* ---- calibration bundle -------------------------------------------------- */

typedef struct lcamv_calibration lcamv_calibration;

LCAMV_API lcamv_status lcamv_calibration_load(const char* json_path,
                                              lcamv_calibration** out);
LCAMV_API lcamv_status lcamv_calibration_save(const lcamv_calibration* calib,
                                              const char* json_path);
/* The built-in desk-scale rig (camera 1920x1200, projector 912x1140, 80 mm
 * baseline); image_scale shrinks both image planes proportionally. */
LCAMV_API lcamv_status lcamv_calibration_default_rig(double image_scale,
                                                     lcamv_calibration** out);
LCAMV_API void lcamv_calibration_free(lcamv_calibration* calib);

/* ---- synthetic capture --------------------------------------------------- */

typedef enum lcamv_sim_preset {
  LCAMV_PRESET_WHITE_PLANE = 0, /* uniform plane scan                         */
  LCAMV_PRESET_COLORBOARD = 1,  /* random colored checker plane               */
  LCAMV_PRESET_PLATE_SWEEP = 2, /* pose_NN/ subdirectories for projector LCA  */
  LCAMV_PRESET_FLAT_LEVELS = 3, /* uniform-intensity pairs for noise calib    */
  LCAMV_PRESET_CORNERS = 4      /* corners.json for camera LCA calib          */
} lcamv_sim_preset;

typedef struct lcamv_sim_options {
  int preset;                /* lcamv_sim_preset */
  uint64_t seed;
  double rig_scale;          /* 1.0 = full resolution */
  int steps;                 /* phase shifts N */
  double wavelength;         /* fringe period, projector pixels */
  int periods;               /* L, power of two */
  int quantize;              /* 1: 8-bit captures (PNG), 0: float (F32R) */
  int noise;                 /* 1: desk-scale RGB sensor noise, 0: noiseless */
  double blue_k0_override;   /* >=0 replaces the blue read-noise coefficient */
  int inject_cam_lca;        /* 1: built-in camera LCA truth */
  int inject_prj_lca;        /* 1: built-in projector LCA truth */
  int crosstalk;             /* 1: overlapping-spectra mixing matrix */
  double plane_z;            /* plane distance (mm) */
  int poses;                 /* plate-sweep pose count */
  double z_min, z_max;       /* plate-sweep depth range (mm) */
  int flat_levels;           /* flat-field level count P */
  int board_cols, board_rows;
  int corner_nx, corner_ny;
  double corner_jitter;      /* px */
} lcamv_sim_options;

LCAMV_API void lcamv_sim_options_init(lcamv_sim_options* options);
LCAMV_API lcamv_status lcamv_simulate(const lcamv_sim_options* options, const char* out_dir);

/* Projector pattern playback stacks (fringe_NN.png / gray_NN.png). */
LCAMV_API lcamv_status lcamv_write_patterns(const char* out_dir, double wavelength,
                                            int periods, int steps, int prj_width,
                                            int prj_height);

/* ---- calibration stages -------------------------------------------------- */

/* Camera LCA from matched checkerboard corners (corners.json). Updates the
 * bundle in place; optionally reports the per-channel RMS residual (px). */
LCAMV_API lcamv_status lcamv_calibrate_cam_lca(lcamv_calibration* calib,
                                               const char* corners_json, double* rms_r,
                                               double* rms_b);

/* Projector LCA from white-plate pose datasets. When diagnostics_dir is not
 * NULL, writes the pixel-wise Pearson correlation maps there. */
LCAMV_API lcamv_status lcamv_calibrate_prj_lca(lcamv_calibration* calib,
                                               const char* const* pose_dirs, size_t n_poses,
                                               const char* diagnostics_dir);

/* Poisson-Gaussian noise coefficients from a flat-field directory; the ROI
 * restricts the pixel domain (width/height <= 0 uses the whole image). */
LCAMV_API lcamv_status lcamv_calibrate_noise(lcamv_calibration* calib, const char* flat_dir,
                                             int roi_x, int roi_y, int roi_width,
                                             int roi_height);

/* ---- reconstruction ------------------------------------------------------ */

typedef struct lcamv_reconstruct_options {
  const char* mode;            /* lcamv | lca | mv | mean | yuv | green */
  double ci_multiplier;        /* outlier gate width, default 2.72 */
  double modulation_threshold; /* I_B validity threshold, default 2.0 */
  double guard_sigmas;         /* period-transition guard width, default 6 */
  double assumed_noise_var;    /* guard noise floor without calibrated k */
  double wavelength;           /* fringe period; 0 = dataset manifest value */
  int periods;                 /* phase periods L; 0 = manifest value */
  int steps;                   /* phase shifts N; 0 = manifest value */
} lcamv_reconstruct_options;

LCAMV_API void lcamv_reconstruct_options_init(lcamv_reconstruct_options* options);

/* Runs the reconstruction pipeline on a capture dataset. Any of the output
 * paths may be NULL to skip that artifact. */
LCAMV_API lcamv_status lcamv_reconstruct(const char* dataset_dir,
                                         const lcamv_calibration* calib,
                                         const lcamv_reconstruct_options* options,
                                         const char* ply_path, const char* depth_f32r,
                                         const char* variance_f32r);

/* ---- evaluation ----------------------------------------------------------- */

typedef struct lcamv_plane_report {
  double normal[3];
  double distance;
  double mse;  /* mm^2, over all ROI points */
  double rmse;
  uint64_t n_total;
  uint64_t n_subsampled;
} lcamv_plane_report;

/* Total-least-squares plane fit on a depth raster (F32R). The plane comes
 * from a seeded random subsample; the error uses every ROI point. Optionally
 * writes a JSON report and the signed error map. */
LCAMV_API lcamv_status lcamv_eval_plane(const char* depth_f32r,
                                        const lcamv_calibration* calib, int roi_x, int roi_y,
                                        int roi_width, int roi_height, uint64_t subsample,
                                        uint64_t seed, lcamv_plane_report* report,
                                        const char* report_json, const char* error_map_f32r);

/* ---- Monte-Carlo confidence interval ------------------------------------- */

typedef struct lcamv_mc_options {
  double k0, k1;   /* Poisson-Gaussian coefficients */
  double i_a, i_b; /* mean / modulation intensity */
  int steps;       /* phase shifts */
  int samples;     /* per grid point */
  int grid;        /* phase grid resolution */
  uint64_t seed;
} lcamv_mc_options;

LCAMV_API void lcamv_mc_options_init(lcamv_mc_options* options);

/* Simulates the wrapped-phase error distribution and reports the mean 99%
 * CI half-width in units of the analytic phase std. csv_path (optional)
 * receives per-phase rows: phase, analytic sigma, empirical sigma, CI. */
LCAMV_API lcamv_status lcamv_monte_carlo_ci(const lcamv_mc_options* options,
                                            const char* csv_path, double* mean_multiplier);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* LCAMV_H */
