use std::collections::BTreeSet;

use crate::name::{Name, PrefixTable};
use crate::ndn::{NdnConfig, NdnNode};
use crate::trace::{MsgType, Trace};
use crate::types::{NodeId, SimTime};

use super::{
    Delivery, DiscoveryResult, Locator, ResourceTree, SclError, SclInstance, SclKind, Subscription, SubscriptionMode,
};

const DEFAULT_PORT: u32 = 5683;

/// A set of SCL instances around one NSCL, with the shared clock and trace.
#[derive(Debug, Clone)]
pub struct M2mSystem {
    instances: Vec<SclInstance>,
    nscl: Option<NodeId>,
    now: SimTime,
    ndn_config: NdnConfig,
    pub trace: Trace,
}

impl Default for M2mSystem {
    fn default() -> Self {
        Self::new(NdnConfig::default())
    }
}

impl M2mSystem {
    pub fn new(ndn_config: NdnConfig) -> Self {
        Self {
            instances: Vec::new(),
            nscl: None,
            now: 0,
            ndn_config,
            trace: Trace::default(),
        }
    }

    pub fn ndn_config(&self) -> &NdnConfig {
        &self.ndn_config
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub(crate) fn set_now(&mut self, now: SimTime) {
        debug_assert!(now >= self.now, "simulated time runs forward");
        self.now = now;
    }

    pub fn nscl(&self) -> Option<NodeId> {
        self.nscl
    }

    /// Adds an instance with a generated locator.
    pub fn add_scl(&mut self, kind: SclKind, base_name: &str) -> Result<NodeId, SclError> {
        let id = NodeId(self.instances.len() as u32);
        let host = format!("10.0.{}.{}", id.0 / 256, id.0 % 256);
        self.add_scl_with_locator(kind, base_name, &host, DEFAULT_PORT)
    }

    pub fn add_scl_with_locator(
        &mut self,
        kind: SclKind,
        base_name: &str,
        host: &str,
        port: u32,
    ) -> Result<NodeId, SclError> {
        let base = Name::parse(base_name)?;
        if self.instances.iter().any(|s| s.base_name == base) {
            return Err(SclError::DuplicateBaseName(base));
        }
        if kind == SclKind::Nscl && self.nscl.is_some() {
            return Err(SclError::DuplicateNscl);
        }
        let id = NodeId(self.instances.len() as u32);
        let locator = Locator::new(id, host, port)?;
        let mut ndn = NdnNode::new(id, &self.ndn_config);
        ndn.fib_register(&base, crate::types::FaceId::APP)
            .expect("application face always exists");
        self.instances.push(SclInstance {
            id,
            kind,
            tree: ResourceTree::new(base.clone()),
            base_name: base,
            locator,
            ndn,
            registered: false,
            registry: PrefixTable::new(),
            subscriptions: Vec::new(),
            watches: BTreeSet::new(),
            inbox: Vec::new(),
        });
        if kind == SclKind::Nscl {
            self.nscl = Some(id);
        }
        Ok(id)
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn instances(&self) -> impl Iterator<Item = &SclInstance> {
        self.instances.iter()
    }

    pub fn get(&self, id: NodeId) -> Result<&SclInstance, SclError> {
        self.instances.get(id.index()).ok_or(SclError::UnknownScl(id))
    }

    pub fn get_mut(&mut self, id: NodeId) -> Result<&mut SclInstance, SclError> {
        self.instances.get_mut(id.index()).ok_or(SclError::UnknownScl(id))
    }

    pub fn by_base_name(&self, base: &str) -> Option<NodeId> {
        let base = Name::parse(base).ok()?;
        self.instances.iter().find(|s| s.base_name == base).map(|s| s.id)
    }

    /// Base name of `id`, used as its label in logs.
    pub fn label(&self, id: NodeId) -> String {
        self.get(id).map(|s| s.base_name.to_string()).unwrap_or_else(|_| id.to_string())
    }

    /// The instance whose base name is a prefix of `name`, registered or not.
    pub fn owner_of(&self, name: &Name) -> Option<NodeId> {
        self.instances
            .iter()
            .filter(|s| s.owns(name))
            .max_by_key(|s| s.base_name.len())
            .map(|s| s.id)
    }

    fn require_nscl(&self, nscl: NodeId) -> Result<(), SclError> {
        let target = self.get(nscl)?;
        if target.kind == SclKind::Nscl {
            Ok(())
        } else {
            Err(SclError::NotAnNscl(target.base_name.clone()))
        }
    }

    fn require_registered(&self, scl: NodeId) -> Result<(), SclError> {
        let s = self.get(scl)?;
        if s.registered {
            Ok(())
        } else {
            Err(SclError::NotRegistered(s.base_name.clone()))
        }
    }

    /// Two-message handshake: request to the NSCL, acknowledgment back.
    pub fn register_scl(&mut self, scl: NodeId, nscl: NodeId) -> Result<(), SclError> {
        self.require_nscl(nscl)?;
        let s = self.get(scl)?;
        if s.kind == SclKind::Nscl {
            return Err(SclError::NsclCannotRegister);
        }
        if s.registered {
            return Err(SclError::AlreadyRegistered(s.base_name.clone()));
        }
        let (base, locator) = (s.base_name.clone(), s.locator.clone());
        let now = self.now;
        self.trace.message(now, scl, nscl, None, MsgType::Register, &base);
        self.trace.message(now, nscl, scl, None, MsgType::Register, &base);
        self.get_mut(nscl)?.registry.insert(base, locator);
        self.get_mut(scl)?.registered = true;
        Ok(())
    }

    /// Local tree mutation; not a message on the wire.
    pub fn create_application(&mut self, scl: NodeId, app: &str) -> Result<Name, SclError> {
        self.get_mut(scl)?.tree.create_application(app)
    }

    pub fn create_container(&mut self, scl: NodeId, app: &str, container: &str) -> Result<Name, SclError> {
        self.get_mut(scl)?.tree.create_container(app, container)
    }

    /// Appends a content instance and sends one NSCL-relayed notification per
    /// active centralized subscription covering the container. Overlay
    /// subscriptions are served by the overlay layer.
    pub fn create_content_instance(
        &mut self,
        scl: NodeId,
        app: &str,
        container: &str,
        payload: Vec<u8>,
    ) -> Result<usize, SclError> {
        let now = self.now;
        let owner = self.get_mut(scl)?;
        let index = owner.tree.append(app, container, payload.clone(), now)?;
        let container_name = owner.tree.container_name(app, container)?;
        let instance_name = container_name
            .child(super::CONTENT_INSTANCES)?
            .child(&index.to_string())?;
        let subscribers: Vec<NodeId> = owner
            .subscriptions
            .iter()
            .filter(|s| s.active && s.mode == SubscriptionMode::Centralized && s.target.is_prefix_of(&container_name))
            .map(|s| s.subscriber.node)
            .collect();
        if subscribers.is_empty() {
            return Ok(index);
        }
        let nscl = self.nscl.expect("centralized subscriptions exist only with an NSCL");
        for subscriber in subscribers {
            self.trace
                .message(now, scl, subscriber, Some(nscl), MsgType::Notify, &instance_name);
            self.get_mut(subscriber)?.inbox.push(Delivery {
                time: now,
                name: instance_name.clone(),
                payload: payload.clone(),
                producer: scl,
            });
        }
        Ok(index)
    }

    pub fn read_resource(&self, scl: NodeId, name: &Name) -> Result<Vec<u8>, SclError> {
        Ok(self.get(scl)?.tree.read(name)?.to_vec())
    }

    /// NSCL-relayed discovery: one exchange resolving the owning SCL, a second
    /// resolving the resource inside it.
    pub fn centralized_discover(
        &mut self,
        origin: NodeId,
        nscl: NodeId,
        query: &Name,
    ) -> Result<DiscoveryResult, SclError> {
        self.require_nscl(nscl)?;
        self.require_registered(origin)?;
        let now = self.now;
        let owner = self.get(nscl)?.registry.longest_prefix_match(query).map(|(b, l)| (b.clone(), l.clone()));
        let Some((owner_base, locator)) = owner else {
            self.trace.message(now, origin, nscl, None, MsgType::DiscoverQuery, query);
            self.trace.message(now, nscl, origin, None, MsgType::DiscoverResponse, query);
            return Err(SclError::NotFound(query.clone()));
        };
        let owner = locator.node;
        for name in [&owner_base, query] {
            self.trace
                .message(now, origin, owner, Some(nscl), MsgType::DiscoverQuery, name);
            self.trace
                .message(now, owner, origin, Some(nscl), MsgType::DiscoverResponse, name);
        }
        self.get(owner)?.tree.resolve(query)?;
        Ok(DiscoveryResult::centralized(query.clone(), locator))
    }

    /// Subscription routed by the NSCL to the target's owner, where it is
    /// recorded; later notifications travel back through the NSCL.
    pub fn subscribe_centralized(
        &mut self,
        origin: NodeId,
        nscl: NodeId,
        target: &Name,
    ) -> Result<Subscription, SclError> {
        self.require_nscl(nscl)?;
        self.require_registered(origin)?;
        let now = self.now;
        let owner = self.get(nscl)?.registry.longest_prefix_match(target).map(|(_, l)| l.node);
        let Some(owner) = owner else {
            self.trace.message(now, origin, nscl, None, MsgType::Subscribe, target);
            return Err(SclError::NotFound(target.clone()));
        };
        self.trace.message(now, origin, owner, Some(nscl), MsgType::Subscribe, target);
        self.get(owner)?.tree.resolve(target)?;
        let subscription = Subscription {
            subscriber: self.get(origin)?.locator.clone(),
            target: target.clone(),
            mode: SubscriptionMode::Centralized,
            active: true,
        };
        self.get_mut(owner)?.subscriptions.push(subscription.clone());
        Ok(subscription)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::Role;

    struct UseCase {
        sys: M2mSystem,
        nscl: NodeId,
        gscl: NodeId,
        dscl: NodeId,
    }

    fn use_case() -> UseCase {
        let mut sys = M2mSystem::default();
        let nscl = sys.add_scl(SclKind::Nscl, "NSCL").unwrap();
        let gscl = sys.add_scl(SclKind::Gscl, "Gscl1").unwrap();
        let dscl = sys.add_scl(SclKind::Dscl, "Dscl1").unwrap();
        UseCase { sys, nscl, gscl, dscl }
    }

    fn n(s: &str) -> Name {
        Name::parse(s).unwrap()
    }

    #[test]
    fn registration_handshake() {
        let UseCase { mut sys, nscl, gscl, .. } = use_case();
        sys.register_scl(gscl, nscl).unwrap();
        let registry = sys.get(nscl).unwrap().registry();
        assert_eq!(registry.get(&n("Gscl1")).unwrap().node, gscl);
        let c = &sys.trace.counters;
        assert_eq!(c.count(gscl, MsgType::Register, Role::Originated), 1);
        assert_eq!(c.count(gscl, MsgType::Register, Role::Received), 1);
        assert_eq!(c.count(nscl, MsgType::Register, Role::Originated), 1);
        assert_eq!(c.count(nscl, MsgType::Register, Role::Received), 1);
        assert!(sys.get(gscl).unwrap().is_registered());
    }

    #[test]
    fn registration_errors() {
        let UseCase {
            mut sys, nscl, gscl, dscl,
        } = use_case();
        sys.register_scl(gscl, nscl).unwrap();
        assert!(matches!(sys.register_scl(gscl, nscl), Err(SclError::AlreadyRegistered(_))));
        assert!(matches!(sys.register_scl(dscl, gscl), Err(SclError::NotAnNscl(_))));
        assert!(matches!(sys.register_scl(nscl, nscl), Err(SclError::NsclCannotRegister)));
    }

    #[test]
    fn many_registrations_fill_registry() {
        let mut sys = M2mSystem::default();
        let nscl = sys.add_scl(SclKind::Nscl, "NSCL").unwrap();
        let count = 25;
        for i in 0..count {
            let id = sys.add_scl(SclKind::Gscl, &format!("G{i}")).unwrap();
            sys.register_scl(id, nscl).unwrap();
        }
        assert_eq!(sys.get(nscl).unwrap().registry().len(), count);
        assert_eq!(sys.trace.counters.count(nscl, MsgType::Register, Role::Received), count as u64);
    }

    #[test]
    fn unique_base_names_and_single_nscl() {
        let UseCase { mut sys, .. } = use_case();
        assert!(matches!(sys.add_scl(SclKind::Gscl, "Gscl1"), Err(SclError::DuplicateBaseName(_))));
        assert!(matches!(sys.add_scl(SclKind::Nscl, "N2"), Err(SclError::DuplicateNscl)));
        assert!(matches!(
            sys.add_scl_with_locator(SclKind::Gscl, "G9", "h", 0),
            Err(SclError::InvalidPort(0))
        ));
    }

    #[test]
    fn centralized_discovery_is_relayed_twice() {
        let UseCase {
            mut sys, nscl, gscl, dscl,
        } = use_case();
        sys.register_scl(gscl, nscl).unwrap();
        sys.register_scl(dscl, nscl).unwrap();
        sys.create_application(gscl, "meter_app").unwrap();
        let result = sys
            .centralized_discover(dscl, nscl, &n("Gscl1/applications/meter_app"))
            .unwrap();
        assert_eq!(result.uri().to_string(), "Gscl1/applications/meter_app");
        assert_eq!(result.locator().node, gscl);
        assert!(result.path().is_none());
        let c = &sys.trace.counters;
        assert_eq!(c.count(nscl, MsgType::DiscoverQuery, Role::Relayed), 2);
        assert_eq!(c.count(nscl, MsgType::DiscoverResponse, Role::Relayed), 2);
    }

    #[test]
    fn centralized_discovery_not_found() {
        let UseCase {
            mut sys, nscl, gscl, dscl,
        } = use_case();
        sys.register_scl(dscl, nscl).unwrap();
        assert!(matches!(
            sys.centralized_discover(dscl, nscl, &n("Gscl1/applications/x")),
            Err(SclError::NotFound(_))
        ));
        sys.register_scl(gscl, nscl).unwrap();
        assert!(matches!(
            sys.centralized_discover(dscl, nscl, &n("Gscl1/applications/x")),
            Err(SclError::NotFound(_))
        ));
        assert!(sys.trace.is_conserved());
    }

    #[test]
    fn discovery_requires_registration() {
        let UseCase {
            mut sys, nscl, dscl, ..
        } = use_case();
        assert!(matches!(
            sys.centralized_discover(dscl, nscl, &n("Gscl1")),
            Err(SclError::NotRegistered(_))
        ));
    }

    #[test]
    fn k_discoveries_relay_2k_queries() {
        let mut sys = M2mSystem::default();
        let nscl = sys.add_scl(SclKind::Nscl, "NSCL").unwrap();
        let origin = sys.add_scl(SclKind::Dscl, "D").unwrap();
        sys.register_scl(origin, nscl).unwrap();
        let k = 7;
        for i in 0..k {
            let g = sys.add_scl(SclKind::Gscl, &format!("G{i}")).unwrap();
            sys.register_scl(g, nscl).unwrap();
            sys.create_application(g, "app").unwrap();
        }
        for i in 0..k {
            sys.centralized_discover(origin, nscl, &n(&format!("G{i}/applications/app")))
                .unwrap();
        }
        assert_eq!(
            sys.trace.counters.count(nscl, MsgType::DiscoverQuery, Role::Relayed),
            2 * k as u64
        );
    }

    fn subscribed(subscribers: usize) -> (M2mSystem, NodeId, NodeId, Vec<NodeId>) {
        let mut sys = M2mSystem::default();
        let nscl = sys.add_scl(SclKind::Nscl, "NSCL").unwrap();
        let gscl = sys.add_scl(SclKind::Gscl, "Gscl1").unwrap();
        sys.register_scl(gscl, nscl).unwrap();
        sys.create_application(gscl, "meter_app").unwrap();
        sys.create_container(gscl, "meter_app", "meter_data").unwrap();
        let subs = (0..subscribers)
            .map(|i| {
                let d = sys.add_scl(SclKind::Dscl, &format!("Dscl{i}")).unwrap();
                sys.register_scl(d, nscl).unwrap();
                sys.subscribe_centralized(d, nscl, &n("Gscl1/applications/meter_app"))
                    .unwrap();
                d
            })
            .collect();
        (sys, nscl, gscl, subs)
    }

    #[test]
    fn one_append_one_relayed_notification() {
        let (mut sys, nscl, gscl, subs) = subscribed(1);
        sys.create_content_instance(gscl, "meter_app", "meter_data", b"42".to_vec())
            .unwrap();
        let c = &sys.trace.counters;
        assert_eq!(c.count(gscl, MsgType::Notify, Role::Originated), 1);
        assert_eq!(c.count(nscl, MsgType::Notify, Role::Relayed), 1);
        assert_eq!(c.count(subs[0], MsgType::Notify, Role::Received), 1);
        let row = sys.trace.rows(MsgType::Notify).next().unwrap();
        assert_eq!((row.src, row.relayer, row.dst), (gscl, Some(nscl), subs[0]));
        assert_eq!(sys.get(subs[0]).unwrap().inbox[0].payload, b"42");
    }

    #[test]
    fn appends_times_subscribers_notifications() {
        for (m, s) in [(5usize, 2usize), (3, 4), (1, 1), (0, 3)] {
            let (mut sys, nscl, gscl, _) = subscribed(s);
            for i in 0..m {
                sys.create_content_instance(gscl, "meter_app", "meter_data", vec![i as u8])
                    .unwrap();
            }
            assert_eq!(
                sys.trace.counters.count(nscl, MsgType::Notify, Role::Relayed),
                (m * s) as u64
            );
            assert!(sys.trace.is_conserved());
        }
    }

    #[test]
    fn subscribe_to_missing_resource() {
        let (mut sys, nscl, _, subs) = subscribed(1);
        assert!(matches!(
            sys.subscribe_centralized(subs[0], nscl, &n("Gscl1/applications/meter_app/containers/nope")),
            Err(SclError::NotFound(_))
        ));
        assert!(matches!(
            sys.subscribe_centralized(subs[0], nscl, &n("Gx/applications")),
            Err(SclError::NotFound(_))
        ));
    }

    #[test]
    fn read_latest_after_append() {
        let (mut sys, _, gscl, _) = subscribed(0);
        sys.create_content_instance(gscl, "meter_app", "meter_data", b"v1".to_vec())
            .unwrap();
        let uri = n("Gscl1/applications/meter_app/containers/meter_data/content_instances/latest");
        assert_eq!(sys.read_resource(gscl, &uri).unwrap(), b"v1");
    }

    #[test]
    fn baseline_never_sends_directly_between_non_nscl() {
        let (mut sys, nscl, gscl, subs) = subscribed(2);
        sys.centralized_discover(subs[0], nscl, &n("Gscl1/applications/meter_app"))
            .unwrap();
        for _ in 0..3 {
            sys.create_content_instance(gscl, "meter_app", "meter_data", vec![])
                .unwrap();
        }
        for row in &sys.trace.log {
            let direct = row.src != nscl && row.dst != nscl;
            if direct {
                assert_eq!(row.relayer, Some(nscl), "{row:?}");
            }
        }
    }
}
