use std::collections::BTreeMap;

use crate::name::{Name, NameComponent};
use crate::types::SimTime;

use super::SclError;

pub const APPLICATIONS: &str = "applications";
pub const CONTAINERS: &str = "containers";
pub const CONTENT_INSTANCES: &str = "content_instances";
pub const LATEST: &str = "latest";
pub const OLDEST: &str = "oldest";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContentInstance {
    pub index: usize,
    pub payload: Vec<u8>,
    pub created: SimTime,
}

#[derive(Debug, Clone, Default)]
pub struct Container {
    instances: Vec<ContentInstance>,
}

impl Container {
    pub fn instances(&self) -> &[ContentInstance] {
        &self.instances
    }

    pub fn latest(&self) -> Option<&ContentInstance> {
        self.instances.last()
    }

    pub fn oldest(&self) -> Option<&ContentInstance> {
        self.instances.first()
    }
}

#[derive(Debug, Clone, Default)]
pub struct Application {
    containers: BTreeMap<NameComponent, Container>,
}

impl Application {
    pub fn containers(&self) -> impl Iterator<Item = (&NameComponent, &Container)> {
        self.containers.iter()
    }
}

/// What a name resolves to inside one SCL's tree.
#[derive(Debug, Clone, Copy)]
pub enum Resource<'a> {
    Base,
    Applications,
    Application(&'a Application),
    Containers(&'a Application),
    Container(&'a Container),
    ContentInstances(&'a Container),
    Instance(&'a ContentInstance),
}

/// `base/applications/<app>/containers/<container>/content_instances/<i>`,
/// where `<i>` is an index or one of the virtual children `latest`/`oldest`.
/// Content instances are append-only.
#[derive(Debug, Clone)]
pub struct ResourceTree {
    base: Name,
    applications: BTreeMap<NameComponent, Application>,
}

impl ResourceTree {
    pub fn new(base: Name) -> Self {
        Self {
            base,
            applications: BTreeMap::new(),
        }
    }

    pub fn base(&self) -> &Name {
        &self.base
    }

    pub fn application_name(&self, app: &str) -> Result<Name, SclError> {
        Ok(self.base.child(APPLICATIONS)?.child(app)?)
    }

    pub fn container_name(&self, app: &str, container: &str) -> Result<Name, SclError> {
        Ok(self.application_name(app)?.child(CONTAINERS)?.child(container)?)
    }

    pub fn create_application(&mut self, app: &str) -> Result<Name, SclError> {
        let name = self.application_name(app)?;
        let key = NameComponent::new(app)?;
        if self.applications.contains_key(&key) {
            return Err(SclError::DuplicateName(name));
        }
        self.applications.insert(key, Application::default());
        Ok(name)
    }

    pub fn create_container(&mut self, app: &str, container: &str) -> Result<Name, SclError> {
        let name = self.container_name(app, container)?;
        let parent = self
            .applications
            .get_mut(&NameComponent::new(app)?)
            .ok_or_else(|| SclError::MissingParent(name.clone()))?;
        let key = NameComponent::new(container)?;
        if parent.containers.contains_key(&key) {
            return Err(SclError::DuplicateName(name));
        }
        parent.containers.insert(key, Container::default());
        Ok(name)
    }

    /// Appends a content instance and returns its index.
    pub fn append(&mut self, app: &str, container: &str, payload: Vec<u8>, now: SimTime) -> Result<usize, SclError> {
        let name = self.container_name(app, container)?;
        let target = self
            .applications
            .get_mut(&NameComponent::new(app)?)
            .and_then(|a| a.containers.get_mut(&NameComponent::new(container).ok()?))
            .ok_or(SclError::MissingParent(name))?;
        let index = target.instances.len();
        target.instances.push(ContentInstance {
            index,
            payload,
            created: now,
        });
        Ok(index)
    }

    pub fn resolve(&self, name: &Name) -> Result<Resource<'_>, SclError> {
        let not_found = || SclError::NotFound(name.clone());
        let rest = name.strip_prefix(&self.base).ok_or_else(not_found)?;
        let labels: Vec<&str> = rest.iter().map(|c| c.as_str()).collect();
        let app = |label: &str| {
            self.applications
                .get(&NameComponent::new(label).map_err(|_| not_found())?)
                .ok_or_else(not_found)
        };
        let container = |a: &'_ str, c: &str| -> Result<&Container, SclError> {
            app(a)?
                .containers
                .get(&NameComponent::new(c).map_err(|_| not_found())?)
                .ok_or_else(not_found)
        };
        match labels.as_slice() {
            [] => Ok(Resource::Base),
            [APPLICATIONS] => Ok(Resource::Applications),
            [APPLICATIONS, a] => Ok(Resource::Application(app(a)?)),
            [APPLICATIONS, a, CONTAINERS] => Ok(Resource::Containers(app(a)?)),
            [APPLICATIONS, a, CONTAINERS, c] => Ok(Resource::Container(container(a, c)?)),
            [APPLICATIONS, a, CONTAINERS, c, CONTENT_INSTANCES] => Ok(Resource::ContentInstances(container(a, c)?)),
            [APPLICATIONS, a, CONTAINERS, c, CONTENT_INSTANCES, selector] => {
                let target = container(a, c)?;
                let instance = match *selector {
                    LATEST => target.latest().ok_or_else(|| SclError::EmptyContainer(name.clone()))?,
                    OLDEST => target.oldest().ok_or_else(|| SclError::EmptyContainer(name.clone()))?,
                    index => index
                        .parse::<usize>()
                        .ok()
                        .and_then(|i| target.instances.get(i))
                        .ok_or_else(not_found)?,
                };
                Ok(Resource::Instance(instance))
            }
            _ => Err(not_found()),
        }
    }

    /// Payload of the content instance addressed by `name`.
    pub fn read(&self, name: &Name) -> Result<&[u8], SclError> {
        match self.resolve(name)? {
            Resource::Instance(i) => Ok(&i.payload),
            _ => Err(SclError::NotFound(name.clone())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn tree() -> ResourceTree {
        let mut t = ResourceTree::new(Name::parse("Gscl1").unwrap());
        t.create_application("meter_app").unwrap();
        t.create_container("meter_app", "meter_data").unwrap();
        t
    }

    fn n(s: &str) -> Name {
        Name::parse(s).unwrap()
    }

    #[test]
    fn container_name_resolves() {
        let t = tree();
        assert!(matches!(
            t.resolve(&n("Gscl1/applications/meter_app/containers/meter_data")),
            Ok(Resource::Container(_))
        ));
        assert_eq!(
            t.container_name("meter_app", "meter_data").unwrap().to_string(),
            "Gscl1/applications/meter_app/containers/meter_data"
        );
    }

    #[test]
    fn duplicates_and_missing_parents() {
        let mut t = tree();
        assert!(matches!(t.create_container("meter_app", "meter_data"), Err(SclError::DuplicateName(_))));
        assert!(matches!(t.create_application("meter_app"), Err(SclError::DuplicateName(_))));
        assert!(matches!(t.create_container("ghost", "c"), Err(SclError::MissingParent(_))));
        assert!(matches!(t.append("meter_app", "ghost", vec![], 0), Err(SclError::MissingParent(_))));
    }

    #[test]
    fn latest_and_oldest() {
        let mut t = tree();
        let base = "Gscl1/applications/meter_app/containers/meter_data/content_instances";
        assert!(matches!(t.read(&n(&format!("{base}/latest"))), Err(SclError::EmptyContainer(_))));
        assert!(matches!(t.read(&n(&format!("{base}/oldest"))), Err(SclError::EmptyContainer(_))));
        for p in [b"1", b"2", b"3"] {
            t.append("meter_app", "meter_data", p.to_vec(), 0).unwrap();
        }
        assert_eq!(t.read(&n(&format!("{base}/latest"))).unwrap(), b"3");
        assert_eq!(t.read(&n(&format!("{base}/oldest"))).unwrap(), b"1");
        assert!(matches!(t.read(&n(&format!("{base}/3"))), Err(SclError::NotFound(_))));
    }

    #[test]
    fn foreign_and_malformed_names_are_not_found() {
        let t = tree();
        assert!(matches!(t.resolve(&n("Gscl2/applications")), Err(SclError::NotFound(_))));
        assert!(matches!(t.resolve(&n("Gscl1/apps")), Err(SclError::NotFound(_))));
        assert!(matches!(
            t.read(&n("Gscl1/applications/meter_app")),
            Err(SclError::NotFound(_))
        ));
    }

    #[test]
    fn random_reads_match_array() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut t = tree();
        let mut oracle: Vec<Vec<u8>> = Vec::new();
        let base = "Gscl1/applications/meter_app/containers/meter_data/content_instances";
        for step in 0..300u32 {
            if rng.gen_bool(0.4) || oracle.is_empty() {
                let payload = step.to_le_bytes().to_vec();
                let idx = t.append("meter_app", "meter_data", payload.clone(), step as u64).unwrap();
                assert_eq!(idx, oracle.len());
                oracle.push(payload);
            } else {
                let i = rng.gen_range(0..oracle.len());
                assert_eq!(t.read(&n(&format!("{base}/{i}"))).unwrap(), oracle[i].as_slice());
                assert_eq!(t.read(&n(&format!("{base}/latest"))).unwrap(), oracle.last().unwrap().as_slice());
            }
        }
    }
}
