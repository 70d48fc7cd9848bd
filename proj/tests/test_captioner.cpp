#include <cmath>
#include <fstream>
#include <numeric>

#include <doctest.h>

#include "observer/captioner/beam.hpp"
#include "observer/captioner/decoder.hpp"
#include "observer/captioner/encoder.hpp"
#include "observer/captioner/model.hpp"
#include "observer/captioner/serialize.hpp"
#include "observer/captioner/train.hpp"
#include "observer/corpus/synth.hpp"
#include "observer/corpus/text.hpp"
#include "observer/error.hpp"
#include "test_util.hpp"
#include "toy_stepper.hpp"

using namespace observer;
using namespace observer::captioner;
using corpus::TokenId;
using observer::testing::TempDir;

namespace {

template <typename T>
FeatureGridT<T> random_grid(std::size_t l, std::size_t d, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    FeatureGridT<T> g(l, d);
    for (auto& v : g.values) v = static_cast<T>(dist(rng));
    return g;
}

corpus::ImageTensor random_tensor(int side, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> dist(0.0f, 1.0f);
    corpus::ImageTensor t;
    t.width = t.height = side;
    t.data.resize(static_cast<std::size_t>(side) * side * 3);
    for (auto& v : t.data) v = dist(rng);
    return t;
}

double norm(const std::vector<double>& v)
{
    return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

/// ||a - b|| / (||a|| + ||b||); zero when both vanish.
double relative_error(const std::vector<double>& a, const std::vector<double>& b)
{
    std::vector<double> diff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
    const double denom = norm(a) + norm(b);
    return denom < 1e-14 ? 0.0 : norm(diff) / denom;
}

corpus::Vocabulary shape_vocab()
{
    const std::vector<std::string> captions = {"a small red circle at the top",
                                               "a large blue square at the bottom"};
    return corpus::Vocabulary::build(captions);
}

}  // namespace

TEST_SUITE("attention")
{
    TEST_CASE("equal scores give uniform weights and the mean context")
    {
        const auto grid = random_grid<double>(6, 4, 1);
        const std::vector<double> scores(6, 0.37);
        const auto out = attend<double>(scores, grid);
        for (double w : out.weights) CHECK(w == doctest::Approx(1.0 / 6.0));
        for (std::size_t d = 0; d < 4; ++d) {
            double mean = 0.0;
            for (std::size_t l = 0; l < 6; ++l) mean += grid.row(l)[d] / 6.0;
            CHECK(out.context[d] == doctest::Approx(mean));
        }
    }

    TEST_CASE("one dominant score saturates to one-hot without overflow")
    {
        const auto grid = random_grid<float>(5, 3, 2);
        const std::vector<float> scores = {1.0f, 2.0f, 1000.0f, -1000.0f, 3.0f};
        const auto out = attend<float>(scores, grid);
        CHECK(out.weights[2] == doctest::Approx(1.0f));
        for (std::size_t d = 0; d < 3; ++d) CHECK(out.context[d] == doctest::Approx(grid.row(2)[d]));
        for (float w : out.weights) CHECK(std::isfinite(w));
    }

    TEST_CASE("context is the alpha-weighted sum of rows")
    {
        const auto grid = random_grid<double>(4, 3, 3);
        const std::vector<double> scores = {0.1, -0.5, 0.9, 0.0};
        const auto out = attend<double>(scores, grid);
        double z = 0.0;
        for (double s : scores) z += std::exp(s);
        for (std::size_t l = 0; l < 4; ++l) CHECK(out.weights[l] == doctest::Approx(std::exp(scores[l]) / z));
        for (std::size_t d = 0; d < 3; ++d) {
            double expect = 0.0;
            for (std::size_t l = 0; l < 4; ++l) expect += out.weights[l] * grid.row(l)[d];
            CHECK(out.context[d] == doctest::Approx(expect));
        }
    }

    TEST_CASE("model attention is a probability vector at every decode step")
    {
        CaptionerModel model(shape_vocab(), ModelDims{}, 5);
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            const auto grid = model.encode_image(random_tensor(256, seed));
            const auto result = decode_beam(model, grid, 3);
            REQUIRE_FALSE(result.attention.empty());
            for (const auto& alpha : result.attention) {
                CHECK(alpha.size() == model.locations());
                double sum = 0.0;
                for (float a : alpha) {
                    CHECK(a >= 0.0f);
                    sum += a;
                }
                CHECK(sum == doctest::Approx(1.0).epsilon(1e-5));
            }
        }
    }
}

TEST_SUITE("decoder")
{
    TEST_CASE("analytic gradients match central differences on a tiny configuration")
    {
        DecoderDims dims{8, 8, 5, 6, 6};
        AttentionDecoder<double> dec(dims);
        std::mt19937_64 rng(9);
        dec.initialize(rng);
        const auto grid = random_grid<double>(4, 8, 10);
        const std::vector<TokenId> tokens = {0, 4, 5, 3, 4, 1};

        dec.for_each_param([](Param<double>& p) { p.zero_grad(); });
        FeatureGridT<double> grad_grid(4, 8);
        dec.loss_and_backward(grid, tokens, &grad_grid);

        const double h = 1e-6;
        dec.for_each_param([&](Param<double>& p) {
            std::vector<double> numeric(p.size());
            for (std::size_t i = 0; i < p.size(); ++i) {
                const double saved = p.value[i];
                p.value[i] = saved + h;
                const double up = dec.loss(grid, tokens);
                p.value[i] = saved - h;
                const double down = dec.loss(grid, tokens);
                p.value[i] = saved;
                numeric[i] = (up - down) / (2 * h);
            }
            CAPTURE(p.name);
            CHECK(relative_error(p.grad, numeric) <= 1e-3);
        });

        auto probe = grid;
        std::vector<double> numeric(grid.values.size());
        for (std::size_t i = 0; i < probe.values.size(); ++i) {
            const double saved = probe.values[i];
            probe.values[i] = saved + h;
            const double up = dec.loss(probe, tokens);
            probe.values[i] = saved - h;
            const double down = dec.loss(probe, tokens);
            probe.values[i] = saved;
            numeric[i] = (up - down) / (2 * h);
        }
        CHECK(relative_error(grad_grid.values, numeric) <= 1e-3);
    }

    TEST_CASE("loss is positive and finite; one token sequence errors")
    {
        AttentionDecoder<float> dec(DecoderDims{8, 8, 5, 6, 6});
        std::mt19937_64 rng(1);
        dec.initialize(rng);
        const auto grid = random_grid<float>(4, 8, 2);
        const std::vector<TokenId> tokens = {0, 4, 1};
        const float loss = dec.loss(grid, tokens);
        CHECK(loss > 0.0f);
        CHECK(std::isfinite(loss));
        const std::vector<TokenId> too_short = {0};
        CHECK_THROWS_AS(dec.loss(grid, too_short), ValidationError);
    }
}

TEST_SUITE("encoder")
{
    TEST_CASE("shape, determinism, finiteness and sensitivity")
    {
        ResidualEncoder<float> a(8, 256), b(8, 256);
        std::mt19937_64 ra(3), rb(3);
        a.initialize(ra);
        b.initialize(rb);
        const auto image = random_tensor(256, 4);
        const auto fa = a.forward(to_planes<float>(image));
        CHECK(fa.locations == 64);
        CHECK(fa.dim == 64);
        CHECK(fa == b.forward(to_planes<float>(image)));
        CHECK(all_finite(fa.values));

        auto nudged = image;
        nudged.at(128, 128, 1) = 1.0f - nudged.at(128, 128, 1);
        CHECK_FALSE(a.forward(to_planes<float>(nudged)) == fa);

        auto black = image;
        std::fill(black.data.begin(), black.data.end(), 0.0f);
        CHECK(all_finite(a.forward(to_planes<float>(black)).values));
    }

    TEST_CASE("analytic gradients match central differences")
    {
        ResidualEncoder<double> enc(2, 64);
        std::mt19937_64 rng(5);
        enc.initialize(rng);
        const auto planes = to_planes<double>(random_tensor(64, 6));
        EncoderCache<double> cache;
        const auto features = enc.forward(planes, &cache);
        const auto probe = random_grid<double>(features.locations, features.dim, 7);

        auto objective = [&] {
            const auto f = enc.forward(planes);
            return std::inner_product(f.values.begin(), f.values.end(), probe.values.begin(), 0.0);
        };
        enc.for_each_param([](Param<double>& p) { p.zero_grad(); });
        enc.backward(cache, probe);

        const double h = 1e-5;
        std::mt19937_64 pick(8);
        enc.for_each_param([&](Param<double>& p) {
            std::vector<double> analytic, numeric;
            for (int trial = 0; trial < 6; ++trial) {
                const std::size_t i = pick() % p.size();
                const double saved = p.value[i];
                p.value[i] = saved + h;
                const double up = objective();
                p.value[i] = saved - h;
                const double down = objective();
                p.value[i] = saved;
                analytic.push_back(p.grad[i]);
                numeric.push_back((up - down) / (2 * h));
            }
            CAPTURE(p.name);
            CHECK(relative_error(analytic, numeric) <= 1e-3);
        });
    }

    TEST_CASE("input side must be a multiple of 32")
    {
        CHECK_THROWS_AS(ResidualEncoder<float>(8, 100), ValidationError);
        CHECK_THROWS_AS(ResidualEncoder<float>(0, 256), ValidationError);
    }
}

TEST_SUITE("beam")
{
    using observer::testing::ToyStepper;

    TEST_CASE("k = 1 equals greedy on random toys")
    {
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            const auto toy = ToyStepper::random(7, 6, seed);
            const auto beam = decode_beam(toy, 1, 6);
            const auto greedy = decode_greedy(toy, 6);
            CHECK(beam.caption == greedy.caption);
        }
    }

    TEST_CASE("k = 1 equals greedy on the model")
    {
        CaptionerModel model(shape_vocab(), ModelDims{}, 11);
        for (std::uint64_t seed = 0; seed < 4; ++seed) {
            const auto grid = model.encode_image(random_tensor(256, 100 + seed));
            CHECK(decode_beam(model, grid, 1).caption == decode_greedy(model, grid).caption);
        }
    }

    TEST_CASE("wide beam recovers the exhaustive optimum")
    {
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const auto toy = ToyStepper::random(5, 3, seed);
            const auto oracle = observer::testing::exhaustive_best(toy, 3);
            const auto beam = decode_beam(toy, 64, 3);
            auto tokens = beam.caption;
            if (oracle.tokens.back() == corpus::special::kEnd) tokens.push_back(corpus::special::kEnd);
            CHECK(tokens == oracle.tokens);
            CHECK(beam.score == doctest::Approx(oracle.score).epsilon(1e-12));
        }
    }

    TEST_CASE("k = 3 on the fixed |V| = 5 toy matches the oracle where greedy does not")
    {
        const auto toy = observer::testing::greedy_trap_toy();
        const auto oracle = observer::testing::exhaustive_best(toy, 3);
        CHECK(oracle.tokens == std::vector<TokenId>{4, corpus::special::kEnd});
        const auto beam = decode_beam(toy, 3, 3);
        CHECK(beam.caption == std::vector<TokenId>{4});
        CHECK(beam.score == doctest::Approx(oracle.score));
        CHECK(decode_greedy(toy, 3).caption == std::vector<TokenId>{corpus::special::kUnk});
    }

    TEST_CASE("best score never decreases as the beam widens on the toy")
    {
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            const auto toy = ToyStepper::random(5, 3, seed);
            const double oracle = observer::testing::exhaustive_best(toy, 3).score;
            for (int k = 1; k <= 4; ++k) CHECK(decode_beam(toy, k, 3).score <= oracle + 1e-12);
        }
    }

    TEST_CASE("never emits START or PAD and respects the length cap")
    {
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            const auto toy = ToyStepper::random(6, 4, seed);
            const auto r = decode_beam(toy, 3, 4);
            CHECK(r.caption.size() <= 4);
            for (const auto id : r.caption) {
                CHECK(id != corpus::special::kStart);
                CHECK(id != corpus::special::kPad);
            }
        }
        CHECK_THROWS_AS(decode_beam(ToyStepper::random(5, 2, 1), 0, 3), ValidationError);
    }
}

TEST_SUITE("training")
{
    TEST_CASE("a single pair is memorized")
    {
        TempDir dir;
        const auto records = corpus::generate_synthetic_corpus(dir.path(), 1, 3);
        const auto vocab = corpus::Vocabulary::build(records);
        TrainConfig cfg;
        cfg.epochs = 200;
        cfg.augment = false;
        cfg.learning_rate = 1e-3;
        const auto result = train(records, vocab, cfg);
        CHECK(result.log.epoch_loss.back() < 0.1);
        const auto grid = result.model.encode_image(
            corpus::preprocess_image(corpus::decode_image(records[0].image_ref)));
        CHECK(vocab.detokenize(decode_greedy(result.model, grid).caption) ==
              corpus::normalize_text(records[0].caption));
        CHECK(caption_image(result.model, corpus::preprocess_image(corpus::decode_image(records[0].image_ref))) ==
              corpus::normalize_text(records[0].caption));
    }

    TEST_CASE("training is deterministic in the seed")
    {
        TempDir dir;
        const auto records = corpus::generate_synthetic_corpus(dir.path(), 3, 4);
        const auto vocab = corpus::Vocabulary::build(records);
        TrainConfig cfg;
        cfg.epochs = 2;
        const auto a = train(records, vocab, cfg);
        const auto b = train(records, vocab, cfg);
        CHECK(a.log.epoch_loss == b.log.epoch_loss);
        CHECK(a.model.identity() == b.model.identity());
    }

    TEST_CASE("divergence raises a training error")
    {
        TempDir dir;
        const auto records = corpus::generate_synthetic_corpus(dir.path(), 1, 5);
        const auto vocab = corpus::Vocabulary::build(records);
        TrainConfig cfg;
        cfg.epochs = 20;
        cfg.learning_rate = 1e30;
        cfg.grad_clip = 0.0;
        CHECK_THROWS_AS(train(records, vocab, cfg), TrainingError);
    }

    TEST_CASE("config validation")
    {
        TrainConfig cfg;
        cfg.learning_rate = -1.0;
        CHECK_THROWS_AS(cfg.validate(), ValidationError);
        cfg = {};
        cfg.epochs = 0;
        CHECK_THROWS_AS(cfg.validate(), ValidationError);
        TempDir dir;
        observer::testing::write_text(dir / "c.json", R"({"epochs": 7, "dims": {"hidden": 32}})");
        const auto loaded = load_train_config(dir / "c.json");
        CHECK(loaded.epochs == 7);
        CHECK(loaded.dims.hidden == 32);
        CHECK(loaded.learning_rate == doctest::Approx(3e-4));
    }
}

TEST_SUITE("serialization")
{
    TEST_CASE("save/load round trip preserves parameters, identity and output")
    {
        TempDir dir;
        CaptionerModel model(shape_vocab(), ModelDims{4, 256, 16, 8, 8}, 21);
        save_model(model, dir / "m.bin");
        const auto loaded = load_model(dir / "m.bin");
        CHECK(loaded.identity() == model.identity());
        CHECK(loaded.vocab() == model.vocab());
        CHECK(loaded.dims() == model.dims());
        const auto image = random_tensor(256, 22);
        CHECK(caption_image(loaded, image) == caption_image(model, image));
    }

    TEST_CASE("truncated, mismatched and foreign files are rejected")
    {
        TempDir dir;
        CaptionerModel model(shape_vocab(), ModelDims{4, 256, 16, 8, 8}, 21);
        save_model(model, dir / "m.bin");
        std::string bytes;
        {
            std::ifstream in(dir / "m.bin", std::ios::binary);
            bytes.assign(std::istreambuf_iterator<char>(in), {});
        }
        auto write = [&](const std::string& name, const std::string& content) {
            observer::testing::write_text(dir / name, content);
            return dir / name;
        };

        CHECK_THROWS_AS(load_model(write("trunc.bin", bytes.substr(0, bytes.size() / 2))), FormatError);
        CHECK_THROWS_AS(load_model(write("tail.bin", bytes.substr(0, bytes.size() - 2))), FormatError);
        CHECK_THROWS_AS(load_model(write("empty.bin", "")), FormatError);
        CHECK_THROWS_AS(load_model(dir / "absent.bin"), FormatError);

        auto version = bytes;
        version[8 + 4 + 19] = '9';  // "observer-captioner/9"
        CHECK_THROWS_AS(load_model(write("version.bin", version)), FormatError);

        auto dims = bytes;
        dims[8 + 4 + 20 + 16] = static_cast<char>(dims[8 + 4 + 20 + 16] + 1);  // hidden
        CHECK_THROWS_AS(load_model(write("dims.bin", dims)), FormatError);

        auto magic = bytes;
        magic[0] = 'X';
        CHECK_THROWS_AS(load_model(write("magic.bin", magic)), FormatError);

        CHECK_NOTHROW(load_model(write("copy.bin", bytes)));
    }
}
