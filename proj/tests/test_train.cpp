#include <doctest.h>

#include <cmath>

#include <Eigen/QR>

#include "helpers.hpp"
#include "pgr/error.hpp"
#include "pgr/features.hpp"
#include "pgr/infonce.hpp"
#include "pgr/train.hpp"

using namespace pgr;

namespace {

Matrix random_unit_rows(pgr::Rng& rng, long rows, long cols) {
    Matrix z(rows, cols);
    for (long i = 0; i < rows; ++i) {
        for (long j = 0; j < cols; ++j) z(i, j) = rng.uniform(-1.0, 1.0);
        z.row(i).normalize();
    }
    return z;
}

// Loss recomputed directly from the definition, term by term, without the
// max-shift trick. Safe at unit-scale similarities.
double oracle_info_nce(const Matrix& z, double tau) {
    const long rows = z.rows();
    Matrix s = (z * z.transpose()) / tau;
    double total = 0;
    for (long i = 0; i < rows; ++i) {
        long p = (i % 2 == 0) ? i + 1 : i - 1;
        double denom = 0;
        for (long j = 0; j < rows; ++j)
            if (j != i) denom += std::exp(s(i, j));
        total += -std::log(std::exp(s(i, p)) / denom);
    }
    return total / double(rows);
}

PairDataset tiny_dataset(int n_places) {
    // anchor and positive differ by one attribute; distinct labels per pair
    PairDataset ds;
    for (int i = 0; i < n_places; ++i) {
        std::string label = testutil::label_pool()[i % testutil::label_pool().size()];
        std::string attr = testutil::attr_pool()[i % testutil::attr_pool().size()];
        std::string attr2 = testutil::attr_pool()[(i + 3) % testutil::attr_pool().size()];
        SceneGraph anchor;
        anchor.nodes = {{"n0", label, {attr}}, {"n1", "tree", {attr2}}};
        anchor.edges = {{"n0", "n1", "next to"}};
        SceneGraph positive = anchor;
        positive.nodes[0].attributes = {attr, attr2};
        ds.push_back({"pl" + std::to_string(i), anchor, positive});
    }
    return ds;
}

TrainConfig tiny_train_config() {
    TrainConfig tc;
    tc.tau = 0.1;
    tc.batch_size = 4;
    tc.epochs = 5;
    tc.lr = 1e-3;
    tc.seed = 42;
    return tc;
}

GatConfig tiny_gat_config() {
    GatConfig gc;
    gc.num_layers = 1;
    gc.heads = 2;
    gc.hidden_dim = 8;
    gc.output_dim = 8;
    gc.seed = 42;
    return gc;
}

}  // namespace

TEST_CASE("similarity matrix scales dot products by the temperature") {
    Matrix z = Matrix::Identity(4, 4);  // orthonormal rows
    Matrix s = similarity_matrix(z, 0.5);
    CHECK((s - Matrix::Identity(4, 4) * 2.0).norm() < 1e-12);

    pgr::Rng rng(2025);
    Matrix r = random_unit_rows(rng, 6, 5);
    double tau = 0.07;
    Matrix st = similarity_matrix(r, tau);
    for (long i = 0; i < 6; ++i) {
        CHECK(st(i, i) == doctest::Approx(1.0 / tau).epsilon(1e-12));
        for (long j = 0; j < 6; ++j)
            CHECK(st(i, j) == doctest::Approx(r.row(i).dot(r.row(j)) / tau).epsilon(1e-12));
    }
}

TEST_CASE("similarity matrix validates inputs") {
    Matrix z = Matrix::Identity(2, 2);
    CHECK_THROWS_AS(similarity_matrix(z, 0.0), RangeError);
    CHECK_THROWS_AS(similarity_matrix(z, -1.0), RangeError);
    Matrix bad = z;
    bad(0, 0) = 2.0;
    CHECK_THROWS_AS(similarity_matrix(bad, 1.0), NormViolation);
}

TEST_CASE("single-pair batch has exactly zero loss") {
    pgr::Rng rng(2126);
    for (int trial = 0; trial < 5; ++trial) {
        Matrix z = random_unit_rows(rng, 2, 16);
        CHECK(std::abs(info_nce_loss(z, 0.07)) <= 1e-12);
    }
}

TEST_CASE("two-pair batch matches the direct formula") {
    Matrix z(4, 3);
    z.row(0) << 1, 0, 0;
    z.row(1) << 0, 1, 0;
    z.row(2) << 0, 0, 1;
    z.row(3) << std::sqrt(0.5), std::sqrt(0.5), 0;
    double got = info_nce_loss(z, 1.0);
    double want = oracle_info_nce(z, 1.0);
    CHECK(got == doctest::Approx(want).epsilon(1e-10));

    pgr::Rng rng(2227);
    for (int trial = 0; trial < 20; ++trial) {
        Matrix r = random_unit_rows(rng, 8, 6);
        CHECK(info_nce_loss(r, 0.07) == doctest::Approx(oracle_info_nce(r, 0.07)).epsilon(1e-9));
    }
}

TEST_CASE("loss is invariant to swapping anchors with positives") {
    pgr::Rng rng(2328);
    Matrix z = random_unit_rows(rng, 10, 7);
    Matrix swapped = z;
    for (long k = 0; k + 1 < z.rows(); k += 2) {
        swapped.row(k) = z.row(k + 1);
        swapped.row(k + 1) = z.row(k);
    }
    CHECK(info_nce_loss(z, 0.1) == doctest::Approx(info_nce_loss(swapped, 0.1)).epsilon(1e-12));
}

TEST_CASE("loss is invariant to a global rotation") {
    pgr::Rng rng(2429);
    Matrix z = random_unit_rows(rng, 8, 8);
    Matrix noise(8, 8);
    for (long i = 0; i < 8; ++i)
        for (long j = 0; j < 8; ++j) noise(i, j) = rng.uniform(-1.0, 1.0);
    Matrix q = Eigen::HouseholderQR<Matrix>(noise).householderQ();
    Matrix rotated = z * q;
    for (long i = 0; i < rotated.rows(); ++i) rotated.row(i).normalize();  // kill fp drift
    CHECK(info_nce_loss(z, 0.07) ==
          doctest::Approx(info_nce_loss(rotated, 0.07)).epsilon(1e-9));
}

TEST_CASE("loss is never negative") {
    pgr::Rng rng(2530);
    for (int trial = 0; trial < 30; ++trial) {
        long pairs = 1 + long(rng.next_below(5));
        Matrix z = random_unit_rows(rng, 2 * pairs, 6);
        CHECK(info_nce_loss(z, 0.07) >= 0.0);
    }
}

TEST_CASE("batches must hold whole pairs") {
    pgr::Rng rng(2631);
    Matrix odd = random_unit_rows(rng, 3, 4);
    CHECK_THROWS_AS(info_nce_loss(odd, 1.0), DimensionMismatch);
    Matrix empty(0, 4);
    CHECK_THROWS_AS(info_nce_loss(empty, 1.0), DimensionMismatch);
}

TEST_CASE("loss gradient matches an independent softmax derivation") {
    pgr::Rng rng(2732);
    for (int trial = 0; trial < 10; ++trial) {
        Matrix z = random_unit_rows(rng, 6, 5);
        const double tau = 0.2;
        Matrix grad;
        double loss = info_nce_loss_and_grad(z, tau, grad);
        CHECK(loss == doctest::Approx(oracle_info_nce(z, tau)).epsilon(1e-10));

        // dL/dz_r = (1/rows) sum_i d(-log softmax_i)/dz_r, assembled row by row
        const long rows = z.rows();
        Matrix s = (z * z.transpose()) / tau;
        Matrix want = Matrix::Zero(rows, z.cols());
        for (long i = 0; i < rows; ++i) {
            long p = (i % 2 == 0) ? i + 1 : i - 1;
            double denom = 0;
            for (long j = 0; j < rows; ++j)
                if (j != i) denom += std::exp(s(i, j));
            for (long j = 0; j < rows; ++j) {
                if (j == i) continue;
                double soft = std::exp(s(i, j)) / denom;
                double coeff = (soft - (j == p ? 1.0 : 0.0)) / (double(rows) * tau);
                want.row(i) += coeff * z.row(j);  // d s_ij / d z_i
                want.row(j) += coeff * z.row(i);  // d s_ij / d z_j
            }
        }
        CHECK((grad - want).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("cosine schedule hits both endpoints") {
    CHECK(cosine_lr(0.1, 0, 100) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(std::abs(cosine_lr(0.1, 100, 100)) <= 1e-20);
    CHECK(cosine_lr(0.1, 50, 100) == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(cosine_lr(0.1, 200, 100) == cosine_lr(0.1, 100, 100));  // clamped
    CHECK_THROWS_AS(cosine_lr(0.1, 0, 0), RangeError);
    // monotone decreasing across the schedule
    double prev = cosine_lr(1.0, 0, 50);
    for (long s = 1; s <= 50; ++s) {
        double cur = cosine_lr(1.0, s, 50);
        CHECK(cur <= prev);
        prev = cur;
    }
}

TEST_CASE("optimizer step matches a hand-rolled update") {
    const long n = 4;
    VecX<double> theta(n), grad(n);
    theta << 1.0, -2.0, 0.5, 3.0;
    grad << 0.1, -0.2, 0.0, 1.5;
    const double lr = 0.01, wd = 0.1;
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;

    AdamW<double> opt(n);
    VecX<double> stepped = theta;
    opt.step(stepped, grad, lr, wd);

    VecX<double> m = (1 - b1) * grad;
    VecX<double> v = (1 - b2) * grad.cwiseProduct(grad);
    VecX<double> mhat = m / (1 - b1);
    VecX<double> vhat = v / (1 - b2);
    VecX<double> want = theta;
    for (long i = 0; i < n; ++i) want[i] -= lr * mhat[i] / (std::sqrt(vhat[i]) + eps);
    want -= lr * wd * want;  // decay decoupled from the adaptive step

    CHECK((stepped - want).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(opt.steps_taken() == 1);
}

TEST_CASE("decoupled decay shrinks parameters even with zero gradient") {
    VecX<double> theta(3);
    theta << 1.0, -1.0, 2.0;
    AdamW<double> opt(3);
    VecX<double> zero = VecX<double>::Zero(3);
    opt.step(theta, zero, 0.1, 0.5);
    VecX<double> want(3);
    want << 0.95, -0.95, 1.9;
    CHECK((theta - want).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("optimizer rejects mismatched sizes") {
    AdamW<double> opt(4);
    VecX<double> theta = VecX<double>::Zero(3);
    VecX<double> grad = VecX<double>::Zero(3);
    CHECK_THROWS_AS(opt.step(theta, grad, 0.1, 0.0), DimensionMismatch);
}

TEST_CASE("pair datasets round-trip through disk") {
    testutil::TempDir dir("pairs");
    PairDataset ds = tiny_dataset(5);
    std::string path = dir.file("pairs.jsonl");
    save_pair_dataset(ds, path);
    PairDataset back = load_pair_dataset(path);
    REQUIRE(back.size() == ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK(back[i].place_id == ds[i].place_id);
        CHECK(back[i].anchor == ds[i].anchor);
        CHECK(back[i].positive == ds[i].positive);
    }
}

TEST_CASE("training is deterministic for a fixed seed") {
    PairDataset ds = tiny_dataset(6);
    HashedEmbedder emb(16);
    TrainConfig tc = tiny_train_config();

    auto run = [&](int jobs) {
        TrainConfig cfg = tc;
        cfg.jobs = jobs;
        GatConfig gc = tiny_gat_config();
        auto params = init_params(gc, emb.dim(), emb.dim());
        TrainReport report = train(params, ds, emb, cfg);
        return std::pair{flatten_parameters(params), report};
    };

    auto [theta1, rep1] = run(1);
    auto [theta2, rep2] = run(1);
    CHECK(theta1 == theta2);
    CHECK(rep1.epoch_losses == rep2.epoch_losses);
    CHECK(rep1.lr_trace == rep2.lr_trace);

    // worker count must not change the numbers
    auto [theta4, rep4] = run(4);
    CHECK(theta1 == theta4);
    CHECK(rep1.epoch_losses == rep4.epoch_losses);
}

TEST_CASE("training reduces the contrastive loss") {
    PairDataset ds = tiny_dataset(8);
    HashedEmbedder emb(16);
    TrainConfig tc = tiny_train_config();
    tc.epochs = 100;
    tc.lr = 3e-3;
    tc.batch_size = 8;
    GatConfig gc = tiny_gat_config();
    auto params = init_params(gc, emb.dim(), emb.dim());
    TrainReport report = train(params, ds, emb, tc);

    REQUIRE(report.epoch_losses.size() == 100);
    CHECK(report.epoch_losses.back() < report.epoch_losses.front());
    for (double l : report.epoch_losses) CHECK(l >= 0.0);
    CHECK(report.total_steps == 100);  // one batch per epoch at this size
    REQUIRE(!report.lr_trace.empty());
    CHECK(report.lr_trace.front() == doctest::Approx(tc.lr).epsilon(1e-12));
    CHECK(report.lr_trace.back() < tc.lr * 0.01);
}

TEST_CASE("training validates its configuration") {
    PairDataset ds = tiny_dataset(2);
    HashedEmbedder emb(16);
    GatConfig gc = tiny_gat_config();
    auto params = init_params(gc, emb.dim(), emb.dim());

    TrainConfig bad = tiny_train_config();
    bad.tau = 0.0;
    CHECK_THROWS_AS(train(params, ds, emb, bad), RangeError);

    CHECK_THROWS_AS(train(params, {}, emb, tiny_train_config()), EmptyDataset);
}
