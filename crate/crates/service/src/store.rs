//! In-memory image store with least-recently-used eviction.

use std::collections::HashMap;
use std::ops::Deref;
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::SystemTime;

use objdetect::image::RasterImage;
use rand::distr::{Alphanumeric, SampleString};

/// Length of generated ids.
pub const ID_LEN: usize = 22;

#[derive(Debug)]
pub struct StoredImage {
    pub id: String,
    pub pixels: RasterImage,
    pub uploaded_at: SystemTime,
    pub byte_size: usize,
}

#[derive(Debug)]
struct Slot {
    image: Arc<StoredImage>,
    last_used: u64,
    pins: usize,
}

#[derive(Debug)]
struct Inner {
    capacity: usize,
    clock: u64,
    entries: HashMap<String, Slot>,
}

impl Inner {
    fn tick(&mut self) -> u64 {
        self.clock += 1;
        self.clock
    }

    /// Drops unpinned entries, oldest first, until within capacity. `keep`
    /// is never dropped.
    fn evict(&mut self, keep: Option<&str>) {
        while self.entries.len() > self.capacity {
            let victim = self
                .entries
                .iter()
                .filter(|(id, s)| s.pins == 0 && Some(id.as_str()) != keep)
                .min_by_key(|(_, s)| s.last_used)
                .map(|(id, _)| id.clone());
            match victim {
                Some(id) => {
                    self.entries.remove(&id);
                }
                None => break,
            }
        }
    }
}

/// Shared handle; clones refer to the same store.
///
/// Pinned images are never evicted, so the store may exceed its capacity
/// while every surplus entry is in use.
#[derive(Debug, Clone)]
pub struct ImageStore {
    inner: Arc<Mutex<Inner>>,
}

impl ImageStore {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "store capacity must be positive");
        ImageStore {
            inner: Arc::new(Mutex::new(Inner {
                capacity,
                clock: 0,
                entries: HashMap::new(),
            })),
        }
    }

    fn lock(&self) -> MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
    }

    pub fn capacity(&self) -> usize {
        self.lock().capacity
    }

    pub fn len(&self) -> usize {
        self.lock().entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Membership test that does not count as a use.
    pub fn contains(&self, id: &str) -> bool {
        self.lock().entries.contains_key(id)
    }

    /// Stores `pixels` under a fresh random id.
    pub fn put(&self, pixels: RasterImage, byte_size: usize) -> Arc<StoredImage> {
        let mut inner = self.lock();
        let mut id = Alphanumeric.sample_string(&mut rand::rng(), ID_LEN);
        while inner.entries.contains_key(&id) {
            id = Alphanumeric.sample_string(&mut rand::rng(), ID_LEN);
        }
        Self::insert(&mut inner, id, pixels, byte_size)
    }

    /// Stores `pixels` under `id` unless that id is already present, in
    /// which case the existing entry is used and returned.
    pub fn put_with_id(&self, id: &str, pixels: RasterImage, byte_size: usize) -> Arc<StoredImage> {
        let mut inner = self.lock();
        let now = inner.tick();
        if let Some(slot) = inner.entries.get_mut(id) {
            slot.last_used = now;
            return slot.image.clone();
        }
        Self::insert(&mut inner, id.to_string(), pixels, byte_size)
    }

    fn insert(inner: &mut Inner, id: String, pixels: RasterImage, byte_size: usize) -> Arc<StoredImage> {
        let image = Arc::new(StoredImage {
            id: id.clone(),
            pixels,
            uploaded_at: SystemTime::now(),
            byte_size,
        });
        let last_used = inner.tick();
        inner.entries.insert(
            id.clone(),
            Slot {
                image: image.clone(),
                last_used,
                pins: 0,
            },
        );
        inner.evict(Some(&id));
        image
    }

    pub fn get(&self, id: &str) -> Option<Arc<StoredImage>> {
        let mut inner = self.lock();
        let now = inner.tick();
        let slot = inner.entries.get_mut(id)?;
        slot.last_used = now;
        Some(slot.image.clone())
    }

    /// Like [`get`](Self::get), but holds the image against eviction until
    /// the guard is dropped.
    pub fn pin(&self, id: &str) -> Option<Pinned> {
        let mut inner = self.lock();
        let now = inner.tick();
        let slot = inner.entries.get_mut(id)?;
        slot.last_used = now;
        slot.pins += 1;
        Some(Pinned {
            store: self.clone(),
            image: slot.image.clone(),
        })
    }

    pub fn delete(&self, id: &str) -> bool {
        self.lock().entries.remove(id).is_some()
    }

    fn unpin(&self, image: &Arc<StoredImage>) {
        let mut inner = self.lock();
        if let Some(slot) = inner.entries.get_mut(&image.id) {
            if Arc::ptr_eq(&slot.image, image) {
                slot.pins = slot.pins.saturating_sub(1);
            }
        }
        inner.evict(None);
    }
}

#[derive(Debug)]
pub struct Pinned {
    store: ImageStore,
    image: Arc<StoredImage>,
}

impl Deref for Pinned {
    type Target = StoredImage;

    fn deref(&self) -> &StoredImage {
        &self.image
    }
}

impl Drop for Pinned {
    fn drop(&mut self) {
        self.store.unpin(&self.image);
    }
}
