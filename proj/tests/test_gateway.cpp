#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "melkit/gateway.hpp"
#include "melkit/prompts.hpp"

#include "helpers.hpp"

using namespace melkit;

namespace {

GatewayConfig mock_config(std::uint64_t seed = 0, int dim = 64,
                          MockMode mode = MockMode::hash_choice) {
  GatewayConfig cfg;
  cfg.backend = Backend::mock;
  cfg.mock_dim = dim;
  cfg.mock_seed = seed;
  cfg.mock_mode = mode;
  return cfg;
}

}  // namespace

TEST_CASE("mock chat replies are frozen functions of the input", "[gateway]") {
  MockGateway gw(mock_config());

  Entity e;
  e.id = "e1";
  e.name = "Mito Inc";
  e.description =
      "Mito Inc makes precision gears for tiny robots and other small "
      "machines used in labs worldwide.";
  ChatRequest summary;
  summary.user = render_entity_summary_prompt(e);
  REQUIRE(gw.chat(summary) ==
          "SUMMARY(776ad8d6): Mito Inc makes precision gears for tiny robots "
          "and other small machines");

  Mention m;
  m.id = "m1";
  m.name = "Mito";
  m.context = "A gear factory near the old canal.";
  ChatRequest mention;
  mention.user = render_mention_prompt(m).text;
  REQUIRE(gw.chat(mention) == "The Mito refer to MOCK-7cb8c788.");

  ChatRequest generic;
  generic.user = "hello";
  REQUIRE(gw.chat(generic) == "MOCK-REPLY-8fe9535b");
  REQUIRE(gw.chat(generic) == "MOCK-REPLY-8fe9535b");

  MockGateway gw7(mock_config(7));
  REQUIRE(gw7.chat(generic) == "MOCK-REPLY-bc6b535a");

  REQUIRE(gw.model_tag() == "mock/64/0");
  REQUIRE(gw.telemetry().requests == 4);
}

TEST_CASE("mock selection replies follow the mode", "[gateway]") {
  Mention m;
  m.id = "m1";
  m.name = "Beta";
  m.context = "ctx";
  m.description = "desc";
  std::vector<TableEntry> table = {
      {"e1", "Alpha", "sa"}, {"e2", "Beta", "sb"}, {"e3", "Gamma", "sc"}};
  ChatRequest req;
  req.user = render_selection_prompt(m, table);

  MockGateway gold(mock_config(0, 64, MockMode::always_gold));
  REQUIRE(gold.chat(req) ==
          "```json\n{\n    \"id\": \"1\",\n    \"name\": \"Beta\"\n}\n```");

  MockGateway hash(mock_config(0, 64, MockMode::hash_choice));
  std::string first = hash.chat(req);
  REQUIRE(first == hash.chat(req));
  // The reply always carries a fenced JSON object naming one candidate.
  bool named_candidate = false;
  for (const auto& t : table)
    if (first.find("\"name\": \"" + t.name + "\"") != std::string::npos)
      named_candidate = true;
  REQUIRE(named_candidate);

  // always-gold falls back to hashing when no candidate name matches.
  Mention stranger = m;
  stranger.name = "Delta";
  ChatRequest req2;
  req2.user = render_selection_prompt(stranger, table);
  MockGateway gold2(mock_config(0, 64, MockMode::always_gold));
  MockGateway hash2(mock_config(0, 64, MockMode::hash_choice));
  REQUIRE(gold2.chat(req2) == hash2.chat(req2));
}

TEST_CASE("mock multimodal replies hash the image bytes", "[gateway]") {
  MockGateway gw(mock_config());
  Mention m;
  m.id = "m1";
  m.name = "Mito";
  m.context = "ctx";
  ChatRequest req;
  req.user = render_mention_prompt(m).text;
  req.image = std::string("PNGBYTES-A");
  std::string a = gw.chat_multimodal(req);
  REQUIRE(a == gw.chat_multimodal(req));
  REQUIRE(a.rfind("The Mito refer to MOCK-", 0) == 0);
  REQUIRE(a.back() == '.');

  ChatRequest req_b = req;
  req_b.image = std::string("PNGBYTES-B");
  REQUIRE(gw.chat_multimodal(req_b) != a);

  // The text-only path hashes only the prompt, so it differs too.
  ChatRequest text = req;
  text.image.reset();
  REQUIRE(gw.chat(text) != a);
}

TEST_CASE("mock embeddings: unit norm, determinism, trigram bags", "[gateway]") {
  MockGateway gw(mock_config(0, 128));
  auto out = gw.embed({"alpha beta gamma", "ab", "alpha beta gamma"});
  REQUIRE(out.size() == 3);
  for (const auto& v : out) {
    REQUIRE(v.size() == 128);
    double norm = 0.0;
    for (float x : v) norm += static_cast<double>(x) * x;
    REQUIRE(std::fabs(std::sqrt(norm) - 1.0) < 1e-6);
  }
  REQUIRE(out[0] == out[2]);
  REQUIRE(out[0] != out[1]);
  // Below three bytes the whole string hashes to a single bucket.
  int nonzero = 0;
  for (float x : out[1])
    if (x != 0.0f) ++nonzero;
  REQUIRE(nonzero == 1);

  auto again = gw.embed({"alpha beta gamma"});
  REQUIRE(again[0] == out[0]);
  MockGateway other(mock_config(9, 128));
  REQUIRE(other.embed({"alpha beta gamma"})[0] != out[0]);
}

TEST_CASE("gateway preconditions", "[gateway]") {
  MockGateway gw(mock_config());
  ChatRequest r;
  r.user = "hi";
  r.image = std::string("bytes");
  REQUIRE_ERROR(gw.chat(r), precondition);
  ChatRequest mm;
  mm.user = "hi";
  REQUIRE_ERROR(gw.chat_multimodal(mm), precondition);
  mm.image = std::string();
  REQUIRE_ERROR(gw.chat_multimodal(mm), precondition);
  ChatRequest neg;
  neg.user = "hi";
  neg.temperature = -1.0;
  REQUIRE_ERROR(gw.chat(neg), precondition);
  ChatRequest toks;
  toks.user = "hi";
  toks.max_tokens = 0;
  REQUIRE_ERROR(gw.chat(toks), precondition);
  REQUIRE_ERROR(gw.embed({}), precondition);
  REQUIRE_ERROR(gw.embed({"ok", ""}), precondition);
}

TEST_CASE("temperature override warns exactly once per gateway", "[gateway]") {
  MockGateway gw(mock_config());
  ChatRequest r;
  r.user = "hi";
  r.temperature = 0.7;
  std::ostringstream captured;
  auto* old = std::cerr.rdbuf(captured.rdbuf());
  gw.chat(r);
  gw.chat(r);
  std::cerr.rdbuf(old);
  const std::string text = captured.str();
  auto first = text.find("warning: temperature");
  REQUIRE(first != std::string::npos);
  REQUIRE(text.find("warning: temperature", first + 1) == std::string::npos);
}

TEST_CASE("image media types", "[gateway]") {
  REQUIRE(image_media_from_path("a/b/pic.PNG") == ImageMedia::png);
  REQUIRE(image_media_from_path("pic.jpg") == ImageMedia::jpeg);
  REQUIRE(image_media_from_path("pic.jpeg") == ImageMedia::jpeg);
  REQUIRE_ERROR(image_media_from_path("pic.gif"), unsupported_media_type);
  REQUIRE_ERROR(image_media_from_path("noext"), unsupported_media_type);
  REQUIRE(std::string(image_media_mime(ImageMedia::png)) == "image/png");
  REQUIRE(std::string(image_media_mime(ImageMedia::jpeg)) == "image/jpeg");
}

// ---------------------------------------------------------------------------
// HTTP backend against an in-process server
// ---------------------------------------------------------------------------

namespace {

struct FakeServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;

  void start() {
    port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  void stop() {
    server.stop();
    if (thread.joinable()) thread.join();
  }
  ~FakeServer() { stop(); }

  GatewayConfig config() const {
    GatewayConfig cfg;
    cfg.backend = Backend::http;
    cfg.endpoint_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    cfg.model_name = "test-model";
    cfg.api_key_env = "MELKIT_TEST_KEY";
    cfg.timeout_seconds = 10.0;
    cfg.backoff_base_ms = 1;
    return cfg;
  }
};

std::string chat_body(const std::string& content, long total_tokens = 0) {
  ojson obj = ojson::object();
  obj["choices"] = ojson::array();
  ojson choice = ojson::object();
  choice["message"]["content"] = content;
  obj["choices"].push_back(choice);
  if (total_tokens > 0) obj["usage"]["total_tokens"] = total_tokens;
  return obj.dump();
}

}  // namespace

TEST_CASE("http chat: request shape, auth header, usage telemetry", "[gateway]") {
  setenv("MELKIT_TEST_KEY", "sk-test", 1);
  FakeServer fake;
  ojson seen_body;
  std::string seen_auth;
  fake.server.Post("/v1/chat/completions",
                   [&](const httplib::Request& req, httplib::Response& res) {
                     seen_body = ojson::parse(req.body);
                     seen_auth = req.get_header_value("Authorization");
                     res.set_content(chat_body("the reply", 42), "application/json");
                   });
  fake.start();

  HttpGateway gw(fake.config());
  ChatRequest r;
  r.system = std::string("sys");
  r.user = "question";
  REQUIRE(gw.chat(r) == "the reply");

  REQUIRE(seen_auth == "Bearer sk-test");
  REQUIRE(seen_body["model"] == "test-model");
  REQUIRE(seen_body["temperature"] == 0.0);
  REQUIRE(seen_body["max_tokens"] == 1024);
  REQUIRE(seen_body["messages"].size() == 2);
  REQUIRE(seen_body["messages"][0]["role"] == "system");
  REQUIRE(seen_body["messages"][0]["content"] == "sys");
  REQUIRE(seen_body["messages"][1]["role"] == "user");
  REQUIRE(seen_body["messages"][1]["content"] == "question");

  auto t = gw.telemetry();
  REQUIRE(t.requests == 1);
  REQUIRE(t.retries == 0);
  REQUIRE(t.failures == 0);
  REQUIRE(t.tokens == 42);
  unsetenv("MELKIT_TEST_KEY");
}

TEST_CASE("http multimodal chat sends a base64 data url part", "[gateway]") {
  FakeServer fake;
  ojson seen_body;
  fake.server.Post("/v1/chat/completions",
                   [&](const httplib::Request& req, httplib::Response& res) {
                     seen_body = ojson::parse(req.body);
                     res.set_content(chat_body("ok"), "application/json");
                   });
  fake.start();

  HttpGateway gw(fake.config());
  ChatRequest r;
  r.user = "describe";
  r.image = std::string("IMGBYTES");
  r.image_media = ImageMedia::jpeg;
  REQUIRE(gw.chat_multimodal(r) == "ok");

  const auto& content = seen_body["messages"][0]["content"];
  REQUIRE(content.is_array());
  REQUIRE(content.size() == 2);
  REQUIRE(content[0]["type"] == "text");
  REQUIRE(content[0]["text"] == "describe");
  REQUIRE(content[1]["type"] == "image_url");
  REQUIRE(content[1]["image_url"]["url"] ==
          "data:image/jpeg;base64," + base64_encode("IMGBYTES"));
}

TEST_CASE("http retry policy: 429 retries, 401 does not", "[gateway]") {
  FakeServer fake;
  std::atomic<int> hits{0};
  fake.server.Post("/v1/chat/completions",
                   [&](const httplib::Request&, httplib::Response& res) {
                     int n = hits.fetch_add(1);
                     if (n < 2) {
                       res.status = 429;
                       res.set_content("slow down", "text/plain");
                     } else {
                       res.set_content(chat_body("finally"), "application/json");
                     }
                   });
  fake.start();

  HttpGateway gw(fake.config());
  ChatRequest r;
  r.user = "q";
  REQUIRE(gw.chat(r) == "finally");
  auto t = gw.telemetry();
  REQUIRE(t.requests == 3);
  REQUIRE(t.retries == 2);
  REQUIRE(t.failures == 0);

  FakeServer denied;
  std::atomic<int> denied_hits{0};
  denied.server.Post("/v1/chat/completions",
                     [&](const httplib::Request&, httplib::Response& res) {
                       denied_hits.fetch_add(1);
                       res.status = 401;
                       res.set_content("no key", "text/plain");
                     });
  denied.start();
  HttpGateway gw2(denied.config());
  REQUIRE_ERROR(gw2.chat(r), http_status);
  REQUIRE(denied_hits.load() == 1);  // 4xx (except 408/429) never retries
  auto t2 = gw2.telemetry();
  REQUIRE(t2.requests == 1);
  REQUIRE(t2.retries == 0);
  REQUIRE(t2.failures == 1);
}

TEST_CASE("http errors: malformed body, retries exhausted, transport", "[gateway]") {
  FakeServer fake;
  std::atomic<int> bad_hits{0};
  fake.server.Post("/v1/chat/completions",
                   [&](const httplib::Request&, httplib::Response& res) {
                     bad_hits.fetch_add(1);
                     res.set_content("not json at all", "application/json");
                   });
  fake.start();
  HttpGateway gw(fake.config());
  ChatRequest r;
  r.user = "q";
  REQUIRE_ERROR(gw.chat(r), malformed_response);
  REQUIRE(bad_hits.load() == 1);  // a bad 200 body is not retryable

  FakeServer flaky;
  flaky.server.Post("/v1/chat/completions",
                    [&](const httplib::Request&, httplib::Response& res) {
                      res.status = 503;
                      res.set_content("down", "text/plain");
                    });
  flaky.start();
  GatewayConfig cfg = flaky.config();
  cfg.max_retries = 2;
  HttpGateway gw2(cfg);
  REQUIRE_ERROR(gw2.chat(r), retries_exhausted);
  auto t = gw2.telemetry();
  REQUIRE(t.requests == 3);
  REQUIRE(t.retries == 2);
  REQUIRE(t.failures == 1);

  // Nothing listening: transport errors retry, then give up.
  FakeServer ghost;
  ghost.start();
  GatewayConfig dead = ghost.config();
  ghost.stop();
  dead.max_retries = 1;
  dead.timeout_seconds = 2.0;
  HttpGateway gw3(dead);
  REQUIRE_ERROR(gw3.chat(r), retries_exhausted);
  REQUIRE(gw3.telemetry().retries == 1);
}

TEST_CASE("http embeddings: index reordering, batching, validation", "[gateway]") {
  FakeServer fake;
  std::atomic<int> posts{0};
  fake.server.Post("/v1/embeddings", [&](const httplib::Request& req,
                                         httplib::Response& res) {
    posts.fetch_add(1);
    ojson body = ojson::parse(req.body);
    const auto& input = body["input"];
    ojson reply = ojson::object();
    reply["data"] = ojson::array();
    // Answer in reverse order; the client must restore it via "index".
    for (std::size_t i = input.size(); i-- > 0;) {
      ojson item = ojson::object();
      item["index"] = i;
      item["embedding"] = ojson::array();
      // Vector encodes the input's length so reordering is observable.
      item["embedding"].push_back(static_cast<double>(
          input[i].get<std::string>().size()));
      item["embedding"].push_back(1.0);
      reply["data"].push_back(item);
    }
    reply["usage"]["total_tokens"] = 5;
    res.set_content(reply.dump(), "application/json");
  });
  fake.start();

  GatewayConfig cfg = fake.config();
  cfg.embed_batch = 2;
  HttpGateway gw(cfg);
  auto out = gw.embed({"a", "bb", "ccc", "dddd", "eeeee"});
  REQUIRE(posts.load() == 3);  // ceil(5 / 2)
  REQUIRE(out.size() == 5);
  for (std::size_t i = 0; i < out.size(); ++i) {
    REQUIRE(out[i].size() == 2);
    REQUIRE(out[i][0] == static_cast<float>(i + 1));
  }
  REQUIRE(gw.telemetry().tokens == 15);
}

TEST_CASE("http embeddings reject malformed replies", "[gateway]") {
  auto serve_and_embed = [](const std::string& body_json) -> ErrorCode {
    FakeServer fake;
    fake.server.Post("/v1/embeddings",
                     [&](const httplib::Request&, httplib::Response& res) {
                       res.set_content(body_json, "application/json");
                     });
    fake.start();
    HttpGateway gw(fake.config());
    try {
      gw.embed({"x", "y"});
      return ErrorCode::precondition;  // unreachable on the expected paths
    } catch (const Error& e) {
      return e.code();
    }
  };

  // Missing data array.
  REQUIRE(serve_and_embed(R"({"object":"list"})") == ErrorCode::malformed_response);
  // Short data array.
  REQUIRE(serve_and_embed(
              R"({"data":[{"index":0,"embedding":[1.0]}]})") ==
          ErrorCode::malformed_response);
  // Duplicate index.
  REQUIRE(serve_and_embed(
              R"({"data":[{"index":0,"embedding":[1.0]},)"
              R"({"index":0,"embedding":[2.0]}]})") == ErrorCode::malformed_response);
  // Out-of-range index.
  REQUIRE(serve_and_embed(
              R"({"data":[{"index":0,"embedding":[1.0]},)"
              R"({"index":5,"embedding":[2.0]}]})") == ErrorCode::malformed_response);
  // Dim change mid-reply.
  REQUIRE(serve_and_embed(
              R"({"data":[{"index":0,"embedding":[1.0]},)"
              R"({"index":1,"embedding":[1.0,2.0]}]})") == ErrorCode::dim_mismatch);
  // Non-numeric value.
  REQUIRE(serve_and_embed(
              R"({"data":[{"index":0,"embedding":["a"]},)"
              R"({"index":1,"embedding":[1.0]}]})") == ErrorCode::malformed_response);
}

TEST_CASE("http gateway bounds concurrent requests", "[gateway]") {
  FakeServer fake;
  std::atomic<int> current{0};
  std::atomic<int> peak{0};
  fake.server.Post("/v1/chat/completions",
                   [&](const httplib::Request&, httplib::Response& res) {
                     int now = current.fetch_add(1) + 1;
                     int prev = peak.load();
                     while (now > prev && !peak.compare_exchange_weak(prev, now)) {
                     }
                     std::this_thread::sleep_for(std::chrono::milliseconds(5));
                     current.fetch_sub(1);
                     res.set_content(chat_body("ok"), "application/json");
                   });
  fake.start();

  GatewayConfig cfg = fake.config();
  cfg.max_inflight = 3;
  HttpGateway gw(cfg);
  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  for (int i = 0; i < 16; ++i) {
    threads.emplace_back([&] {
      ChatRequest r;
      r.user = "q";
      if (gw.chat(r) == "ok") ok.fetch_add(1);
    });
  }
  for (auto& t : threads) t.join();
  REQUIRE(ok.load() == 16);
  REQUIRE(peak.load() <= 3);
}

TEST_CASE("http gateway config validation", "[gateway]") {
  GatewayConfig cfg;
  cfg.backend = Backend::http;
  cfg.endpoint_url = "localhost:8080/v1";  // no scheme
  REQUIRE_ERROR(HttpGateway(cfg), bad_config);
  cfg.endpoint_url = "http://localhost:8080/v1";
  cfg.max_inflight = 0;
  REQUIRE_ERROR(HttpGateway(cfg), bad_config);

  REQUIRE(parse_backend("http") == Backend::http);
  REQUIRE(parse_backend("mock") == Backend::mock);
  REQUIRE_ERROR(parse_backend("grpc"), bad_config);
  REQUIRE(parse_mock_mode("hash-choice") == MockMode::hash_choice);
  REQUIRE(parse_mock_mode("always-gold") == MockMode::always_gold);
  REQUIRE_ERROR(parse_mock_mode("random"), bad_config);
}

TEST_CASE("make_gateway picks the backend", "[gateway]") {
  GatewayConfig cfg = mock_config(3, 16);
  auto gw = make_gateway(cfg);
  REQUIRE(gw->model_tag() == "mock/16/3");
  cfg.backend = Backend::http;
  cfg.model_name = "remote-model";
  REQUIRE(make_gateway(cfg)->model_tag() == "remote-model");
}
