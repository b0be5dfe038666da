#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "d2dmac/engine.hpp"
#include "d2dmac/fixture.hpp"
#include "d2dmac/traffic.hpp"

using namespace d2dmac;

namespace {

std::vector<std::vector<std::int64_t>> burst_arrivals(const std::vector<Flow>& flows) {
  std::vector<std::vector<std::int64_t>> arr(flows.size());
  for (const auto& f : flows)
    arr[f.id].assign(static_cast<std::size_t>(f.demand), 0);
  return arr;
}

}  // namespace

TEST_CASE("one frame of the worked example delivers all 26 packets", "[engine]") {
  const auto fx = worked_example();
  FrameConfig cfg;
  cfg.overhead_slots = 0;
  cfg.sim_length_s = 9 * cfg.slot_seconds;  // exactly one frame
  cfg.validate_schedules = true;

  const auto res = run_simulation(fx.flows, fx.node_kinds(),
                                  ProtocolConfig::d2dmac(2.0), burst_arrivals(fx.flows),
                                  cfg);
  CHECK(res.frames == 1);
  CHECK(res.metrics.arrivals == 26);
  CHECK(res.metrics.delivered == 26);
  CHECK(res.metrics.network_throughput == 26);
  CHECK(res.end_slot == 9);

  // per-flow delivery slots from the schedule layout:
  //  flow 1 (B->C, rate 2, stage 1): 1,1,2,2,3,3
  //  flow 3 (D->AP1, rate 3, stage 1): 1,1,1,2,2,2,3,3
  //  flow 2 (AP1->B, rate 3, stage 2 at slot 3): 4,4,4,5,5,5,6
  //  flow 0 (A->B via backhaul, last hop rate 2, stage 3 at slot 6): 7,7,8,8,9
  std::map<int, std::vector<std::int64_t>> deliveries;
  for (const auto& p : res.packets) {
    REQUIRE(p.delivery_slot.has_value());
    deliveries[p.flow].push_back(*p.delivery_slot);
  }
  CHECK(deliveries[1] == std::vector<std::int64_t>{1, 1, 2, 2, 3, 3});
  CHECK(deliveries[3] == std::vector<std::int64_t>{1, 1, 1, 2, 2, 2, 3, 3});
  CHECK(deliveries[2] == std::vector<std::int64_t>{4, 4, 4, 5, 5, 5, 6});
  CHECK(deliveries[0] == std::vector<std::int64_t>{7, 7, 8, 8, 9});

  // delay aggregates follow: total 99 over 26 packets
  CHECK(res.metrics.avg_delay_slots ==
        Catch::Approx(99.0 / 26.0).epsilon(1e-12));
  CHECK(res.metrics.flow_delay_bw == Catch::Approx(51.0 / 11.0).epsilon(1e-12));
  CHECK(res.metrics.flow_delay_in == Catch::Approx(48.0 / 15.0).epsilon(1e-12));
  CHECK(res.metrics.flow_tp_bw == Catch::Approx(5.5).epsilon(1e-12));
  CHECK(res.metrics.flow_tp_in == Catch::Approx(7.5).epsilon(1e-12));
}

TEST_CASE("no arrivals yields an empty report", "[engine]") {
  const auto fx = worked_example();
  FrameConfig cfg;
  cfg.sim_length_s = 100 * cfg.slot_seconds;
  std::vector<std::vector<std::int64_t>> arrivals(fx.flows.size());
  const auto res = run_simulation(fx.flows, fx.node_kinds(),
                                  ProtocolConfig::d2dmac(2.0), arrivals, cfg);
  CHECK(res.metrics.network_throughput == 0);
  CHECK_FALSE(res.metrics.avg_delay_slots.has_value());
  CHECK(res.metrics.arrivals == 0);
}

TEST_CASE("single-hop queue drains one packet per slot", "[engine]") {
  std::vector<Flow> flows(1);
  flows[0].id = 0;
  flows[0].src = 0;
  flows[0].dst = 1;
  flows[0].demand = 0;
  flows[0].direct_link = DirectionalLink{0, 1, 1, LinkKind::Direct};
  const std::vector<NodeKind> kinds(2, NodeKind::Wn);

  const int k = 7;
  std::vector<std::vector<std::int64_t>> arrivals{std::vector<std::int64_t>(k, 0)};
  FrameConfig cfg;
  cfg.overhead_slots = 0;
  cfg.sim_length_s = k * cfg.slot_seconds;
  const auto res = run_simulation(flows, kinds, ProtocolConfig::d2dmac(2.0),
                                  arrivals, cfg);
  REQUIRE(res.metrics.delivered == k);
  std::vector<std::int64_t> want;
  for (int i = 1; i <= k; ++i) want.push_back(i);
  std::vector<std::int64_t> got;
  for (const auto& p : res.packets) got.push_back(*p.delivery_slot);
  CHECK(got == want);
}

TEST_CASE("arrivals are conserved across delivery, discard and queueing", "[engine]") {
  const auto fx = worked_example();
  TrafficSpec spec;
  spec.mode = TrafficSpec::Mode::Poisson;
  spec.lambda = 30000.0;
  spec.burst_max = 4;
  FrameConfig cfg;
  cfg.sim_length_s = 0.01;
  cfg.delay_threshold = 400;
  for (std::uint64_t seed : {1ULL, 5ULL, 9ULL}) {
    const auto arrivals = generate_arrivals(spec, 4, cfg.horizon_slots(),
                                            cfg.slot_seconds, seed);
    std::int64_t total = 0;
    for (const auto& a : arrivals) total += static_cast<std::int64_t>(a.size());
    const auto res = run_simulation(fx.flows, fx.node_kinds(),
                                    ProtocolConfig::d2dmac(2.0), arrivals, cfg,
                                    FeasibilityCheck{}, seed);
    CHECK(res.metrics.arrivals == total);
    std::int64_t queued = 0;
    for (const auto& p : res.packets)
      if (!p.delivery_slot && !p.discarded) ++queued;
    CHECK(res.metrics.delivered + res.metrics.discarded + queued == total);
    // causality: delivery never precedes arrival
    for (const auto& p : res.packets)
      if (p.delivery_slot) CHECK(*p.delivery_slot > p.arrival_slot);
  }
}

TEST_CASE("per-frame schedules validate for every protocol", "[engine]") {
  const auto fx = worked_example();
  TrafficSpec spec;
  spec.mode = TrafficSpec::Mode::Poisson;
  spec.lambda = 20000.0;
  spec.burst_max = 3;
  FrameConfig cfg;
  cfg.sim_length_s = 0.005;
  cfg.validate_schedules = true;
  const auto arrivals =
      generate_arrivals(spec, 4, cfg.horizon_slots(), cfg.slot_seconds, 3);
  for (const auto proto :
       {ProtocolConfig::d2dmac(2.0), ProtocolConfig::odmac(), ProtocolConfig::rpdmac(),
        ProtocolConfig::fdmac_e(), ProtocolConfig::optimal()}) {
    const auto res = run_simulation(fx.flows, fx.node_kinds(), proto, arrivals, cfg,
                                    FeasibilityCheck{}, 17);
    CHECK(res.validation_failures == 0);
    CHECK(res.validated_schedules > 0);
    CHECK(res.metrics.delivered > 0);
  }
}

TEST_CASE("the optimal per-frame scheduler finishes no later", "[engine]") {
  // the exact solver minimizes the slot total, so its frames can only be
  // as long or shorter than the greedy ones (per-packet delays may still
  // differ: stage order within an equal-length schedule is free)
  const auto fx = worked_example();
  FrameConfig cfg;
  cfg.overhead_slots = 0;
  cfg.sim_length_s = 9 * cfg.slot_seconds;
  const auto arrivals = burst_arrivals(fx.flows);
  const auto greedy = run_simulation(fx.flows, fx.node_kinds(),
                                     ProtocolConfig::d2dmac(2.0), arrivals, cfg);
  const auto exact = run_simulation(fx.flows, fx.node_kinds(),
                                    ProtocolConfig::optimal(), arrivals, cfg);
  REQUIRE(exact.metrics.delivered == greedy.metrics.delivered);
  CHECK(exact.end_slot <= greedy.end_slot);
  CHECK(exact.end_slot == 9);
}

TEST_CASE("delayed packets past the threshold are discarded, late ones excluded",
          "[engine]") {
  // one slow direct flow, threshold so tight the tail of the burst dies
  std::vector<Flow> flows(1);
  flows[0].id = 0;
  flows[0].src = 0;
  flows[0].dst = 1;
  flows[0].direct_link = DirectionalLink{0, 1, 1, LinkKind::Direct};
  const std::vector<NodeKind> kinds(2, NodeKind::Wn);
  FrameConfig cfg;
  cfg.overhead_slots = 0;
  cfg.delay_threshold = 4;
  cfg.sim_length_s = 40 * cfg.slot_seconds;

  // 6 packets at slot 0: the first frame delivers them at slots 1..6;
  // delays 5 and 6 exceed TH but still count toward the delay average
  std::vector<std::vector<std::int64_t>> arrivals{std::vector<std::int64_t>(6, 0)};
  const auto res = run_simulation(flows, kinds, ProtocolConfig::d2dmac(2.0),
                                  arrivals, cfg);
  CHECK(res.metrics.delivered == 6);
  CHECK(res.metrics.network_throughput == 4);
  CHECK(res.metrics.avg_delay_slots == Catch::Approx(3.5));  // mean of 1..6

  // a packet stuck behind a long frame is dropped from the queue
  std::vector<std::vector<std::int64_t>> late{std::vector<std::int64_t>(6, 0)};
  late[0].push_back(1);  // arrives during the first frame, waits 6 slots
  const auto res2 = run_simulation(flows, kinds, ProtocolConfig::d2dmac(2.0),
                                   late, cfg);
  CHECK(res2.metrics.discarded == 1);
  CHECK(res2.metrics.delivered == 6);
}

TEST_CASE("runs are deterministic per seed", "[engine]") {
  const auto fx = worked_example();
  TrafficSpec spec;
  spec.mode = TrafficSpec::Mode::Poisson;
  spec.lambda = 15000.0;
  spec.burst_max = 5;
  FrameConfig cfg;
  cfg.sim_length_s = 0.01;
  const auto arrivals =
      generate_arrivals(spec, 4, cfg.horizon_slots(), cfg.slot_seconds, 7);
  for (const auto proto : {ProtocolConfig::rpdmac(), ProtocolConfig::d2dmac(2.0)}) {
    const auto a = run_simulation(fx.flows, fx.node_kinds(), proto, arrivals, cfg,
                                  FeasibilityCheck{}, 99);
    const auto b = run_simulation(fx.flows, fx.node_kinds(), proto, arrivals, cfg,
                                  FeasibilityCheck{}, 99);
    REQUIRE(a.packets.size() == b.packets.size());
    CHECK(a.metrics.network_throughput == b.metrics.network_throughput);
    CHECK(a.frames == b.frames);
    for (std::size_t i = 0; i < a.packets.size(); ++i) {
      CHECK(a.packets[i].delivery_slot == b.packets[i].delivery_slot);
      CHECK(a.packets[i].discarded == b.packets[i].discarded);
    }
  }
}

TEST_CASE("compute_metrics evaluates the formulas on a synthetic log", "[engine]") {
  // two WN-WN flows (0, 1) and one Internet flow (2)
  std::vector<Flow> flows(3);
  std::vector<NodeKind> kinds = {NodeKind::Gateway, NodeKind::Wn, NodeKind::Wn,
                                 NodeKind::Wn};
  flows[0] = {0, 1, 2, {}, std::nullopt, 0, 1};
  flows[1] = {1, 2, 3, {}, std::nullopt, 0, 1};
  flows[2] = {2, 1, 0, {}, std::nullopt, 0, 1};

  std::vector<PacketRecord> log;
  log.push_back({0, 0, 10, false});    // delay 10
  log.push_back({0, 5, 11, false});    // delay 6
  log.push_back({1, 0, 30, false});    // delay 30, above TH
  log.push_back({2, 2, 6, false});     // delay 4
  log.push_back({2, 0, std::nullopt, true});   // discarded
  log.push_back({2, 9, std::nullopt, false});  // still queued

  const auto rep = compute_metrics(log, flows, kinds, 20);
  CHECK(rep.arrivals == 6);
  CHECK(rep.delivered == 4);
  CHECK(rep.discarded == 1);
  CHECK(rep.network_throughput == 3);  // the delay-30 packet is excluded
  CHECK(rep.avg_delay_slots == Catch::Approx((10 + 6 + 30 + 4) / 4.0));
  CHECK(rep.flow_delay_bw == Catch::Approx((10 + 6 + 30) / 3.0));
  CHECK(rep.flow_delay_in == Catch::Approx(4.0));
  CHECK(rep.flow_tp_bw == Catch::Approx(2.0 / 2.0));  // 2 within TH over 2 flows
  CHECK(rep.flow_tp_in == Catch::Approx(1.0 / 1.0));
}

TEST_CASE("increasing the load never reduces arrivals in a run", "[engine]") {
  const auto fx = worked_example();
  FrameConfig cfg;
  cfg.sim_length_s = 0.01;
  std::int64_t prev = -1;
  for (double load : {0.5, 1.0, 2.0, 4.0}) {
    TrafficSpec spec;
    spec.mode = TrafficSpec::Mode::Poisson;
    spec.lambda = poisson_rate_for_load(load, 8000, 4, 2e9);
    spec.burst_max = 3;
    const auto arrivals = generate_arrivals(spec, 4, cfg.horizon_slots(),
                                            cfg.slot_seconds, 77);
    const auto res = run_simulation(fx.flows, fx.node_kinds(),
                                    ProtocolConfig::d2dmac(2.0), arrivals, cfg);
    CHECK(res.metrics.arrivals >= prev);
    prev = res.metrics.arrivals;
  }
}
