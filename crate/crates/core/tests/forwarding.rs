use std::collections::{BTreeMap, HashMap, VecDeque};

use proptest::prelude::*;

use oscl_core::ndn::{Data, Emission, FaceKind, Interest, NdnConfig, NdnNode, Packet};
use oscl_core::{FaceId, Name, NodeId};

fn n(s: &str) -> Name {
    Name::parse(s).unwrap()
}

/// Nodes joined by point-to-point links, driven hop by hop.
struct Net {
    nodes: Vec<NdnNode>,
    wires: HashMap<(usize, FaceId), (usize, FaceId)>,
    interest_hops: usize,
    data_hops: usize,
    delivered: Vec<(usize, Packet)>,
}

impl Net {
    fn new(count: usize) -> Self {
        Self {
            nodes: (0..count)
                .map(|i| NdnNode::new(NodeId(i as u32), &NdnConfig::default()))
                .collect(),
            wires: HashMap::new(),
            interest_hops: 0,
            data_hops: 0,
            delivered: Vec::new(),
        }
    }

    fn link(&mut self, a: usize, b: usize) -> (FaceId, FaceId) {
        let fa = self.nodes[a].add_face(FaceKind::Link { peer: NodeId(b as u32) });
        let fb = self.nodes[b].add_face(FaceKind::Link { peer: NodeId(a as u32) });
        self.wires.insert((a, fa), (b, fb));
        self.wires.insert((b, fb), (a, fa));
        (fa, fb)
    }

    /// Runs packets to quiescence. Producers answer with `payload`.
    fn run(&mut self, start: usize, packet: Packet, producer: usize) {
        let mut queue = VecDeque::from([(start, FaceId::APP, packet)]);
        while let Some((at, face, packet)) = queue.pop_front() {
            let out = match packet {
                Packet::Interest(i) => self.nodes[at].on_interest(i, face, 0).unwrap(),
                Packet::Data(d) => self.nodes[at].on_data(d, face, 0).unwrap(),
            };
            for e in out {
                let (face, packet) = match e {
                    Emission::Interest { face, interest } => (face, Packet::Interest(interest)),
                    Emission::Data { face, data } => (face, Packet::Data(data)),
                    Emission::Drop { .. } => continue,
                };
                if face == FaceId::APP {
                    match &packet {
                        Packet::Interest(i) if at == producer => {
                            let data = Data::new(i.name.clone(), b"v".to_vec(), 1000, NodeId(at as u32));
                            queue.push_back((at, FaceId::APP, Packet::Data(data)));
                        }
                        _ => self.delivered.push((at, packet)),
                    }
                    continue;
                }
                match packet {
                    Packet::Interest(_) => self.interest_hops += 1,
                    Packet::Data(_) => self.data_hops += 1,
                }
                let (peer, peer_face) = self.wires[&(at, face)];
                queue.push_back((peer, peer_face, packet));
            }
        }
    }
}

/// Counts the hops from `from` to `to` along the line by walking positions.
fn walk_oracle(line: &[usize], from: usize, to: usize) -> usize {
    let pos = |x| line.iter().position(|v| *v == x).unwrap();
    let (mut i, j) = (pos(from), pos(to));
    let mut hops = 0;
    while i != j {
        i = if i < j { i + 1 } else { i - 1 };
        hops += 1;
    }
    hops
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn line_of_ten_forwards_along_the_walk(
        line in Just((0..10usize).collect::<Vec<_>>()).prop_shuffle(),
        flip in any::<bool>(),
    ) {
        let (consumer, producer) = if flip { (line[9], line[0]) } else { (line[0], line[9]) };
        let mut net = Net::new(10);
        let prefix = n("meter");
        let mut toward: BTreeMap<usize, FaceId> = BTreeMap::new();
        for w in line.windows(2) {
            let (fa, fb) = net.link(w[0], w[1]);
            if flip {
                toward.insert(w[1], fb);
            } else {
                toward.insert(w[0], fa);
            }
        }
        for (node, face) in &toward {
            net.nodes[*node].fib_register(&prefix, *face).unwrap();
        }
        net.nodes[producer].fib_register(&prefix, FaceId::APP).unwrap();
        net.run(consumer, Packet::Interest(Interest::new(n("meter/x"), 1)), producer);

        let hops = walk_oracle(&line, consumer, producer);
        prop_assert_eq!(hops, 9);
        prop_assert_eq!(net.interest_hops, hops);
        prop_assert_eq!(net.data_hops, hops);
        prop_assert_eq!(net.delivered.len(), 1);
        prop_assert_eq!(net.delivered[0].0, consumer);
        let relays: Vec<usize> = line.iter().copied().filter(|v| *v != consumer).collect();
        for v in relays {
            prop_assert!(net.nodes[v].cs().contains(&n("meter/x")));
        }
    }

    #[test]
    fn simultaneous_interests_are_suppressed(
        k in 1usize..16,
        faces in 1usize..8,
        times in proptest::collection::vec(0u64..3000, 16),
    ) {
        let mut relay = NdnNode::new(NodeId(0), &NdnConfig::default());
        let up = relay.add_face(FaceKind::Link { peer: NodeId(100) });
        let down: Vec<FaceId> = (0..faces)
            .map(|i| relay.add_face(FaceKind::Link { peer: NodeId(1 + i as u32) }))
            .collect();
        relay.fib_register(&n("p"), up).unwrap();
        let mut arrivals: Vec<u64> = times[..k].to_vec();
        arrivals.sort_unstable();
        let mut upstream = 0;
        for (i, t) in arrivals.iter().enumerate() {
            let out = relay
                .on_interest(Interest::new(n("p/x"), i as u64), down[i % faces], *t)
                .unwrap();
            upstream += out.iter().filter(|e| matches!(e, Emission::Interest { .. })).count();
        }
        prop_assert_eq!(upstream, 1);
        let entry = relay.pit().get(&n("p/x")).unwrap();
        prop_assert_eq!(entry.downstream.len(), k.min(faces));
    }
}

#[test]
fn pit_expiry_matches_filter_oracle() {
    let mut state = 0x9e37_79b9_u64;
    let mut next = move |m: u64| {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 33) % m
    };
    for round in 0..50 {
        let mut node = NdnNode::new(NodeId(0), &NdnConfig::default());
        let up = node.add_face(FaceKind::Link { peer: NodeId(1) });
        let down = node.add_face(FaceKind::Link { peer: NodeId(2) });
        node.fib_register(&n("p"), up).unwrap();
        let mut expected: BTreeMap<Name, u64> = BTreeMap::new();
        for i in 0..40 {
            let name = n(&format!("p/{}", next(25)));
            let (at, life) = (next(500), 1 + next(500));
            // Arrivals are not ordered in time here; the oracle follows the
            // same max rule for repeats.
            node.on_interest(Interest::new(name.clone(), i).with_lifetime(life), down, at)
                .unwrap();
            let e = expected.entry(name).or_insert(at + life);
            *e = (*e).max(at + life);
        }
        let now = next(1200);
        let survivors: Vec<Name> = expected.iter().filter(|(_, exp)| **exp >= now).map(|(k, _)| k.clone()).collect();
        let removed = node.pit_expire(now);
        assert_eq!(removed, expected.len() - survivors.len(), "round {round}");
        let left: Vec<Name> = node.pit().iter().map(|e| e.name.clone()).collect();
        assert_eq!(left, survivors, "round {round}");
    }
}

#[test]
fn nested_prefixes_resolve_to_longest_match() {
    let prefixes = ["a", "a/b", "a/b/c", "a/x", "b", "b/c/d"];
    let mut node = NdnNode::new(NodeId(0), &NdnConfig::default());
    let faces: Vec<FaceId> = (0..prefixes.len())
        .map(|i| node.add_face(FaceKind::Link { peer: NodeId(1 + i as u32) }))
        .collect();
    for (p, f) in prefixes.iter().zip(&faces) {
        node.fib_register(&n(p), *f).unwrap();
    }
    let queries = [
        "a", "a/b", "a/b/c", "a/b/c/d/e", "a/bc", "a/x/y", "a/y", "b/c", "b/c/d/e", "c", "b/x",
    ];
    for (i, q) in queries.iter().enumerate() {
        let name = n(q);
        let want = prefixes
            .iter()
            .zip(&faces)
            .filter(|(p, _)| n(p).is_prefix_of(&name))
            .max_by_key(|(p, _)| n(p).len())
            .map(|(_, f)| *f);
        let got = node.fib().longest_prefix_match(&name).map(|(_, e)| e.next_hops[0]);
        assert_eq!(got, want, "{q}");
        let out = node.on_interest(Interest::new(name, i as u64), FaceId::APP, 0).unwrap();
        match want {
            Some(f) => assert!(matches!(&out[..], [Emission::Interest { face, .. }] if *face == f), "{q}"),
            None => assert!(matches!(&out[..], [Emission::Drop { .. }]), "{q}"),
        }
    }
}

#[test]
fn duplicate_registration_keeps_next_hops() {
    let mut node = NdnNode::new(NodeId(0), &NdnConfig::default());
    let f = node.add_face(FaceKind::Link { peer: NodeId(1) });
    node.fib_register(&n("a"), f).unwrap();
    node.fib_register(&n("a"), f).unwrap();
    assert_eq!(node.fib().get(&n("a")).unwrap().next_hops, vec![f]);
    let (prefix, _) = node.fib().longest_prefix_match(&n("a/b/c")).unwrap();
    assert_eq!(prefix, &n("a"));
}
