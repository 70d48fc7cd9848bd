#include <set>
#include <sstream>

#include <doctest.h>
#include <opencv2/imgproc.hpp>

#include "observer/corpus/dataset.hpp"
#include "observer/corpus/image.hpp"
#include "observer/corpus/synth.hpp"
#include "observer/corpus/text.hpp"
#include "observer/corpus/vocabulary.hpp"
#include "observer/csv.hpp"
#include "observer/error.hpp"
#include "test_util.hpp"

using namespace observer;
using namespace observer::corpus;
using observer::testing::TempDir;
using observer::testing::write_text;

namespace {

RgbImage random_image(int width, int height, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dist(0, 255);
    RgbImage img{width, height, std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height * 3)};
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(dist(rng));
    return img;
}

/// Smooth gradient image so bilinear results are well conditioned.
RgbImage gradient_image(int width, int height)
{
    RgbImage img{width, height, std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height * 3)};
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            img.at(x, y, 0) = static_cast<std::uint8_t>((x * 255) / std::max(1, width - 1));
            img.at(x, y, 1) = static_cast<std::uint8_t>((y * 255) / std::max(1, height - 1));
            img.at(x, y, 2) = static_cast<std::uint8_t>(((x + y) * 7) % 256);
        }
    }
    return img;
}

ImageTensor random_tensor(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> dist(0.0f, 1.0f);
    ImageTensor t;
    t.data.resize(static_cast<std::size_t>(ImageTensor::kSide) * ImageTensor::kSide * 3);
    for (auto& v : t.data) v = dist(rng);
    return t;
}

}  // namespace

TEST_SUITE("text")
{
    TEST_CASE("normalization lowercases and splits on punctuation")
    {
        CHECK(normalize_tokens("Red tree!") == std::vector<std::string>{"red", "tree"});
        CHECK(normalize_tokens("  It's   a co-op. ") ==
              std::vector<std::string>{"it", "s", "a", "co", "op"});
        CHECK(normalize_tokens("...").empty());
        CHECK(normalize_text("The TALL trees,near red-rock") == "the tall trees near red rock");
    }
}

TEST_SUITE("vocabulary")
{
    TEST_CASE("two captions, min_freq 1: three words plus four specials")
    {
        const std::vector<std::string> captions = {"red tree", "red rock"};
        const auto v = Vocabulary::build(captions, 1);
        CHECK(v.size() == 7);
        CHECK(v.id("red") == 4);
        CHECK(v.id("tree") == 5);
        CHECK(v.id("rock") == 6);
    }

    TEST_CASE("min_freq 2 keeps only the repeated word")
    {
        const std::vector<std::string> captions = {"red tree", "red rock"};
        const auto v = Vocabulary::build(captions, 2);
        CHECK(v.size() == 5);
        CHECK(v.contains("red"));
        CHECK(v.id("tree") == special::kUnk);
    }

    TEST_CASE("tokenize wraps with START/END and maps unknown words to UNK")
    {
        const std::vector<std::string> captions = {"red tree", "red rock"};
        const auto v = Vocabulary::build(captions);
        CHECK(v.tokenize("Red tree!") ==
              std::vector<TokenId>{special::kStart, v.id("red"), v.id("tree"), special::kEnd});
        CHECK(v.tokenize("zyzzyva") == std::vector<TokenId>{special::kStart, special::kUnk, special::kEnd});
        CHECK_THROWS_AS(v.tokenize("  ?! "), ValidationError);
    }

    TEST_CASE("errors on empty input and bad min_freq")
    {
        CHECK_THROWS_AS(Vocabulary::build(std::vector<std::string>{}), ValidationError);
        CHECK_THROWS_AS(Vocabulary::build(std::vector<std::string>{"a"}, 0), ValidationError);
    }

    TEST_CASE("bijection and special tokens are never produced by text")
    {
        const std::vector<std::string> captions = {"<start> <end> <pad> <unk> start end"};
        const auto v = Vocabulary::build(captions);
        for (std::size_t i = 0; i < v.size(); ++i) {
            CHECK(v.id(v.token(static_cast<TokenId>(i))) == static_cast<TokenId>(i));
        }
        const auto ids = v.tokenize(captions[0]);
        CHECK(ids.front() == special::kStart);
        CHECK(ids.back() == special::kEnd);
        for (std::size_t i = 1; i + 1 < ids.size(); ++i) {
            CHECK(ids[i] >= special::kCount);
        }
    }

    TEST_CASE("round trip on random in-vocabulary sentences")
    {
        const std::vector<std::string> words = {"red", "tree", "rock", "sky", "blue", "river", "tall", "bird"};
        const auto v = Vocabulary::build(words);
        std::mt19937 rng(1);
        for (int trial = 0; trial < 100; ++trial) {
            std::uniform_int_distribution<std::size_t> len(1, 12), pick(0, words.size() - 1);
            std::string sentence;
            const auto n = len(rng);
            for (std::size_t i = 0; i < n; ++i) {
                sentence += (i ? (rng() % 2 ? " " : ", ") : "") + words[pick(rng)];
                if (rng() % 5 == 0) sentence += "!";
            }
            const auto ids = v.tokenize(sentence);
            CHECK(v.detokenize(ids) == normalize_text(sentence));
            CHECK(std::find(ids.begin(), ids.end(), special::kPad) == ids.end());
        }
    }

    TEST_CASE("synthetic corpus: size equals distinct tokens plus four")
    {
        TempDir dir;
        const auto records = generate_synthetic_corpus(dir.path(), 50, 7);
        std::set<std::string> distinct;
        for (const auto& r : records) {
            std::istringstream words(r.caption);
            for (std::string w; words >> w;) {
                std::transform(w.begin(), w.end(), w.begin(), ::tolower);
                distinct.insert(w);
            }
        }
        CHECK(Vocabulary::build(records).size() == distinct.size() + 4);
    }
}

TEST_SUITE("ingest")
{
    TEST_CASE("three valid rows come back in order")
    {
        TempDir dir;
        for (const char* name : {"a.png", "b.png", "c.png"}) write_png(random_image(8, 6, 1), dir / name);
        write_text(dir / "manifest.csv",
                   "image_file,caption,category\n"
                   "c.png,first,Factual\n"
                   "a.png,\"second, with comma\",\n"
                   "b.png,third,inference\n");
        const auto result = ingest_directory(dir.path());
        REQUIRE(result.records.size() == 3);
        CHECK(result.errors.empty());
        CHECK(result.records[0].image_ref.filename() == "c.png");
        CHECK(result.records[1].caption == "second, with comma");
        CHECK_FALSE(result.records[1].category.has_value());
        CHECK(result.records[2].category == Category::Inference);
    }

    TEST_CASE("missing and broken images are reported per row")
    {
        TempDir dir;
        write_png(random_image(4, 4, 2), dir / "ok.png");
        write_text(dir / "broken.png", "not an image");
        write_text(dir / "manifest.csv",
                   "image_file,caption\n"
                   "ok.png,fine\n"
                   "gone.png,missing file\n"
                   "broken.png,bad bytes\n"
                   "ok.png,   \n");
        const auto result = ingest_directory(dir.path());
        CHECK(result.records.size() == 1);
        REQUIRE(result.errors.size() == 3);
        CHECK(result.errors[0].row == 2);
        CHECK(result.errors[0].message.find("gone.png") != std::string::npos);
        CHECK(result.errors[1].row == 3);
        CHECK(result.errors[2].row == 4);
    }

    TEST_CASE("unknown category is a row error")
    {
        TempDir dir;
        write_png(random_image(4, 4, 2), dir / "ok.png");
        write_text(dir / "manifest.csv", "image_file,caption,category\nok.png,x,Poetic\n");
        const auto result = ingest_directory(dir.path());
        CHECK(result.records.empty());
        CHECK(result.errors.size() == 1);
    }

    TEST_CASE("empty manifest is a dataset error")
    {
        TempDir dir;
        write_text(dir / "manifest.csv", "image_file,caption,category\n");
        CHECK_THROWS_AS(ingest_directory(dir.path()), ValidationError);
        write_text(dir / "manifest.csv", "");
        CHECK_THROWS_AS(ingest_directory(dir.path()), ValidationError);
    }

    TEST_CASE("overlong captions are truncated")
    {
        TempDir dir;
        write_png(random_image(4, 4, 2), dir / "ok.png");
        std::string caption;
        for (int i = 0; i < 40; ++i) caption += "w" + std::to_string(i) + " ";
        write_text(dir / "manifest.csv", "image_file,caption\nok.png," + caption + "\n");
        const auto result = ingest_directory(dir.path());
        REQUIRE(result.records.size() == 1);
        CHECK(result.truncated == 1);
        CHECK(normalize_tokens(result.records[0].caption).size() == kMaxCaptionTokens - 2);
    }

    TEST_CASE("synthetic corpus: 50 records, all Descriptive")
    {
        TempDir dir;
        generate_synthetic_corpus(dir.path(), 50, 7);
        const auto result = ingest_directory(dir.path());
        CHECK(result.records.size() == 50);
        CHECK(result.errors.empty());
        for (const auto& r : result.records) CHECK(r.category == Category::Descriptive);
    }
}

TEST_SUITE("preprocess")
{
    TEST_CASE("1920x1080 crop window")
    {
        const auto w = center_crop_window(1920, 1080);
        CHECK(w.x0 == 448);
        CHECK(w.x0 + w.side == 1472);
        CHECK(w.y0 == 28);
        CHECK(w.y0 + w.side == 1052);
        const auto t = preprocess_image(gradient_image(1920, 1080));
        CHECK(t.width == 256);
        CHECK(t.height == 256);
        CHECK(t.data.size() == 256u * 256u * 3u);
    }

    TEST_CASE("small and exact inputs use the largest centered square")
    {
        const auto w = center_crop_window(800, 600);
        CHECK(w.x0 == 100);
        CHECK(w.y0 == 0);
        CHECK(w.side == 600);
        const auto exact = center_crop_window(1024, 1024);
        CHECK(exact.x0 == 0);
        CHECK(exact.y0 == 0);
        CHECK(exact.side == 1024);
        CHECK(center_crop_window(1, 1).side == 1);
    }

    TEST_CASE("crop + resize agrees with OpenCV within 2/255")
    {
        for (const auto& [w, h] : {std::pair{800, 600}, std::pair{1024, 1024}, std::pair{1920, 1080},
                                  std::pair{300, 500}, std::pair{100, 100}}) {
            CAPTURE(w);
            CAPTURE(h);
            const auto raw = random_image(w, h, static_cast<std::uint64_t>(w * 31 + h));
            const auto ours = preprocess_image(raw);

            const auto win = center_crop_window(w, h);
            cv::Mat full(h, w, CV_8UC3, const_cast<std::uint8_t*>(raw.pixels.data()));
            cv::Mat crop = full(cv::Rect(win.x0, win.y0, win.side, win.side));
            cv::Mat as_float, resized;
            crop.convertTo(as_float, CV_32FC3, 1.0 / 255.0);
            cv::resize(as_float, resized, cv::Size(256, 256), 0, 0, cv::INTER_LINEAR);

            double worst = 0.0;
            for (int y = 0; y < 256; ++y) {
                const auto* row = resized.ptr<cv::Vec3f>(y);
                for (int x = 0; x < 256; ++x) {
                    for (int c = 0; c < 3; ++c) {
                        worst = std::max(worst, std::abs(double(row[x][c]) - double(ours.at(x, y, c))));
                    }
                }
            }
            CHECK(worst <= 2.0 / 255.0);
        }
    }

    TEST_CASE("values stay in [0,1]")
    {
        const auto t = preprocess_image(random_image(513, 377, 9));
        for (float v : t.data) {
            REQUIRE(v >= 0.0f);
            REQUIRE(v <= 1.0f);
        }
    }

    TEST_CASE("decode rejects garbage; PNG round trip is lossless")
    {
        const std::vector<std::uint8_t> junk = {1, 2, 3, 4};
        CHECK_THROWS_AS(decode_image(junk), ImageDecodeError);
        CHECK_THROWS_AS(decode_image(std::filesystem::path("/nonexistent/x.png")), ImageDecodeError);
        const auto img = random_image(17, 9, 4);
        const auto back = decode_image(encode_png(img));
        CHECK(back.width == 17);
        CHECK(back.height == 9);
        CHECK(back.pixels == img.pixels);
    }
}

TEST_SUITE("augment")
{
    TEST_CASE("flip off and zero rotation is the identity")
    {
        const auto t = random_tensor(1);
        CHECK(apply_augmentation(t, {false, 0.0}) == t);
    }

    TEST_CASE("flip is an involution")
    {
        const auto t = random_tensor(2);
        const auto once = apply_augmentation(t, {true, 0.0});
        CHECK_FALSE(once == t);
        CHECK(once.at(0, 5, 1) == t.at(255, 5, 1));
        CHECK(apply_augmentation(once, {true, 0.0}) == t);
    }

    TEST_CASE("rotation keeps shape and range and fills corners with black")
    {
        ImageTensor white;
        white.data.assign(static_cast<std::size_t>(256) * 256 * 3, 1.0f);
        const auto rotated = apply_augmentation(white, {false, 5.0});
        CHECK(rotated.data.size() == white.data.size());
        CHECK(rotated.at(0, 0, 0) == 0.0f);
        CHECK(rotated.at(128, 128, 0) == doctest::Approx(1.0f));
        for (float v : rotated.data) {
            REQUIRE(v >= 0.0f);
            REQUIRE(v <= 1.0f);
        }
    }

    TEST_CASE("sampled parameters respect their ranges")
    {
        std::mt19937_64 rng(5);
        int flips = 0;
        for (int i = 0; i < 2000; ++i) {
            const auto a = sample_augmentation(rng);
            CHECK(a.rotation_degrees >= -5.0);
            CHECK(a.rotation_degrees <= 5.0);
            flips += a.flip ? 1 : 0;
        }
        CHECK(flips > 900);
        CHECK(flips < 1100);
    }

    TEST_CASE("same seed gives bit-identical output")
    {
        const auto t = random_tensor(3);
        std::mt19937_64 a(42), b(42);
        for (int i = 0; i < 5; ++i) CHECK(augment(t, a) == augment(t, b));
    }
}

TEST_SUITE("csv")
{
    TEST_CASE("quoting round trip with adversarial fields")
    {
        const std::vector<std::string> row = {"plain", "with,comma", "with \"quote\"", "multi\nline", "",
                                              "crlf\r\nend"};
        std::ostringstream out;
        csv::write_row(out, row);
        csv::write_row(out, {"k"}, {true});
        CHECK(out.str().find("\"k\"") != std::string::npos);
        std::istringstream in(out.str());
        csv::Reader reader(in);
        CHECK(reader.next_row() == row);
        CHECK(reader.next_row() == std::vector<std::string>{"k"});
        CHECK_FALSE(reader.next_row().has_value());
    }

    TEST_CASE("unterminated quote is a format error")
    {
        std::istringstream in("a,\"b\n");
        csv::Reader reader(in);
        CHECK_THROWS_AS(reader.next_row(), FormatError);
    }
}
