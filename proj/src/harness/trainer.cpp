#include <chrono>
#include <cmath>
#include <ostream>

#include "augablate/data/cifar.hpp"
#include "augablate/harness/trainer.hpp"

namespace augb {

namespace {

// Blob datasets are part of the experiment definition, not of a run, so they
// are generated under this fixed seed and split train-head / test-tail.
constexpr std::uint64_t kBlobDataSeed = 0xB10B5;

std::size_t blob_train_count(const RunSpec& spec) {
  const int per_class = spec.train_per_class > 0 ? spec.train_per_class : 400;
  return static_cast<std::size_t>(per_class) * static_cast<std::size_t>(spec.arch.classes);
}

}  // namespace

Network<float> build_run_network(const RunSpec& spec) {
  ArchitectureSpec arch = spec.arch;
  arch.dropout = spec.regularized;
  const NetworkPlan plan = make_plan(arch);
  Rng rng = Rng::keyed({spec.seed, rng_stream::kInit});
  return build_network<float>(plan, rng);
}

std::pair<Dataset, Dataset> load_full_data(const RunSpec& spec) {
  if (spec.dataset == "blobs") {
    const std::size_t n_train = blob_train_count(spec);
    const std::size_t n_test = static_cast<std::size_t>(spec.blob_test_count);
    Dataset all = synthetic_blobs(n_train + n_test, spec.arch.classes, 32, 32, 3,
                                  kBlobDataSeed);
    Dataset train, test;
    train.classes = test.classes = all.classes;
    for (std::size_t i = 0; i < n_train; ++i)
      train.push(std::move(all.images[i]), all.labels[i]);
    for (std::size_t i = n_train; i < all.size(); ++i)
      test.push(std::move(all.images[i]), all.labels[i]);
    return {std::move(train), std::move(test)};
  }
  if (spec.dataset == "cifar10")
    return {load_cifar(cifar10_train_files(spec.data_dir), 10),
            load_cifar(cifar10_test_files(spec.data_dir), 10)};
  if (spec.dataset == "cifar100")
    return {load_cifar(cifar100_train_files(spec.data_dir), 100),
            load_cifar(cifar100_test_files(spec.data_dir), 100)};
  throw std::invalid_argument("unknown dataset '" + spec.dataset + "'");
}

std::pair<Dataset, Dataset> select_run_data(const RunSpec& spec, const Dataset& full_train,
                                            const Dataset& full_test) {
  Dataset train = spec.train_per_class > 0 && spec.dataset != "blobs"
                      ? balanced_subset(full_train, spec.train_per_class, spec.seed)
                      : full_train;
  Dataset test = head_subset(full_test, static_cast<std::size_t>(
                                            spec.test_limit > 0 ? spec.test_limit : 0));
  return {std::move(train), std::move(test)};
}

std::pair<Dataset, Dataset> load_run_data(const RunSpec& spec) {
  auto [train, test] = load_full_data(spec);
  return select_run_data(spec, train, test);
}

TrainResult train_run(const RunSpec& spec, Network<float>& net, const Dataset& train,
                      const Dataset& test, std::ostream* log) {
  train.validate();
  test.validate();
  const auto t0 = std::chrono::steady_clock::now();

  auto params = net.params();
  OptState<float> opt(params);
  const Scheme scheme{spec.scheme, std::nullopt};

  TrainResult result;
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    const double lr = lr_at_epoch(spec.lr, spec.schedule, epoch);

    Rng shuffle_rng = Rng::keyed({spec.seed, rng_stream::kShuffle,
                                  static_cast<std::uint64_t>(epoch)});
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      const std::size_t j = static_cast<std::size_t>(shuffle_rng.uniform_int(i + 1));
      std::swap(order[i], order[j]);
    }

    Rng dropout_rng = Rng::keyed({spec.seed, rng_stream::kDropout,
                                  static_cast<std::uint64_t>(epoch)});
    double loss_sum = 0;
    run_epoch_batches(
        train, order, spec.batch, scheme, spec.seed, epoch, spec.workers,
        [&](std::size_t b, Batch&& batch) {
          Tensor<float> logits = net.forward(batch.x, Mode::Train, &dropout_rng);
          Tensor<float> grad;
          const double loss = softmax_cross_entropy(logits, batch.labels, &grad);
          if (!std::isfinite(loss))
            throw TrainingDiverged("loss became non-finite at epoch " +
                                   std::to_string(epoch) + ", batch " + std::to_string(b));
          loss_sum += loss * static_cast<double>(batch.labels.size());
          net.backward(grad);
          sgd_step(params, opt, lr, spec.momentum, spec.nesterov,
                   spec.effective_weight_decay());
        });

    EpochStats stats;
    stats.train_loss = loss_sum / static_cast<double>(train.size());
    stats.test_acc = evaluate(net, test, spec.batch).accuracy;
    result.epochs.push_back(stats);
    if (log)
      *log << "epoch " << epoch + 1 << "/" << spec.epochs << "  lr " << lr << "  loss "
           << stats.train_loss << "  test_acc " << stats.test_acc << std::endl;
  }

  result.final_acc = result.epochs.back().test_acc;
  result.tta_acc = evaluate_tta(net, test, spec.batch, spec.tta_views, spec.seed);
  result.mask_draws = net.mask_draws;
  result.decay_applications = opt.decay_applications;
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (log)
    *log << "final_acc " << result.final_acc << "  tta_acc " << result.tta_acc
         << "  wall_s " << result.wall_seconds << std::endl;
  return result;
}

}  // namespace augb
