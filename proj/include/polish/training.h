//
// SPDX-License-Identifier: Apache-2.0
//

#ifndef POLISH_TRAINING_H_
#define POLISH_TRAINING_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polish/student.h"
#include "polish/teacher.h"

namespace polish {

struct AnnotatedPair {
  MolGraph x;
  MolGraph y;
  PolishAnnotation ann;
};

// Teacher annotation, or nullopt when the pair has no center candidate.
std::optional<AnnotatedPair> annotate(const MolGraph &x, const MolGraph &y);

// Vocabulary of the clusters of every added graph A, decomposed with the
// mapped center as a singleton root.
ComponentVocabulary decoder_vocabulary(std::span<const AnnotatedPair> pairs);

// A decomposed with its center (atom 0) as the forced root, as a plan.
AssemblyPlan added_plan(const MolGraph &a);

struct AssemblyTarget {
  int node;  // plan node being placed
  std::vector<GraphFeatures> candidates;
  int truth;
};

// Everything one training step or a forced generation needs, precomputed.
struct TrainingExample {
  MolGraph x;
  MolGraph y;
  std::vector<int> x_ranks;
  std::vector<double> s_te;
  int center = -1;
  std::vector<std::vector<int>> branch_atoms;  // SMILES order
  std::vector<int> branch_flags;  // 1 = preserved
  MolGraph r;
  ViewInputs views;
  MolGraph root;  // singleton A root
  DecodeTarget target;
  AssemblyPlan plan;
  std::vector<AssemblyTarget> assembly;  // nodes with two or more candidates
};

TrainingExample prepare_example(const AnnotatedPair &pair,
                                const ComponentVocabulary &vocab,
                                const StudentConfig &config);

struct LossTerms {
  ad::Var c, r, topo, label, a;
};

// Teacher-forced losses of one example.
LossTerms example_losses(ad::Tape &t, const StudentModel &m,
                         const TrainingExample &ex);

struct TrainConfig {
  int epochs = 30;
  int batch_size = 32;
  double lr = 1e-4;
  // Learning-rate factor applied after every epoch.
  double anneal = 1.0;
  std::uint64_t seed = 1;
  // c, r, topo, label, a.
  std::array<double, 5> weights { 1, 1, 1, 1, 1 };
  // Per-epoch checkpoints epoch_NNN.ckpt when set.
  std::filesystem::path checkpoint_dir;
  // CSV log; header written when the file is new.
  std::filesystem::path log_path;
};

struct EpochStats {
  int epoch = 0;
  double total = 0, c = 0, r = 0, topo = 0, label = 0, a = 0;
  double seconds = 0;
};

inline constexpr const char *kTrainLogHeader =
    "epoch,loss_total,loss_c,loss_r,loss_topo,loss_label,loss_a,seconds";

class Adam {
public:
  explicit Adam(const ad::ParameterSet &params);

  // Applies one update from Parameter::grad, then zeroes the gradients.
  void step(ad::ParameterSet &params, double lr);
  long steps() const { return t_; }

  void write(std::ostream &os) const;
  void read(std::istream &is);

private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  std::vector<ad::Matrix> m_, v_;
  long t_ = 0;
};

struct TrainState {
  std::unique_ptr<StudentModel> model;
  std::unique_ptr<Adam> adam;
  int epochs_done = 0;
  double lr = 0;
};

TrainState new_training(const StudentConfig &config, ComponentVocabulary vocab,
                        const TrainConfig &train);

// Runs the remaining epochs up to train.epochs. Shuffling is seeded per epoch,
// so a resumed run repeats the losses of an uninterrupted one. A NonFinite
// step rethrows after the last good checkpoint is kept.
std::vector<EpochStats> train(
    TrainState &state, std::span<const TrainingExample> examples,
    const TrainConfig &train,
    const std::function<void(const EpochStats &)> &on_epoch = {});

void save_checkpoint(const std::filesystem::path &path, const TrainState &s);
TrainState load_checkpoint(const std::filesystem::path &path);

struct GenerationResult {
  bool ok = false;
  MolGraph molecule;
  std::string error;
  bool valence_error = false;
  int center = -1;
  std::vector<int> preserved;  // branch indices of branches_around(x, center)
};

GenerationResult generate(const StudentModel &m, const MolGraph &x);
// Every decision replaced by the example's teacher decisions.
GenerationResult generate_forced(const StudentModel &m,
                                 const TrainingExample &ex);

struct StudentMetrics {
  int examples = 0;
  double center_accuracy = 0;
  double branch_accuracy = 0;  // around the teacher center
  double exact_match = 0;
  int failures = 0;
  int valence_errors = 0;
};

StudentMetrics evaluate_student(const StudentModel &m,
                                std::span<const TrainingExample> examples);

}  // namespace polish

#endif  // POLISH_TRAINING_H_
