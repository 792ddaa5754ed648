//! Dense integer identifiers and the string dictionary they are interned from.

use std::collections::HashMap;
use std::fmt;

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl From<u32> for $name {
            fn from(v: u32) -> Self {
                $name(v)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

id_type!(
    /// A user of the tagging system.
    UserId
);
id_type!(
    /// A tagged resource (bookmark, publication, artist, movie).
    ItemId
);
id_type!(
    /// A tag. Ascending tag id is the tie-break order for every ranking.
    TagId
);

/// Bidirectional mapping between entity names and dense ids, assigned in
/// first-seen order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Interner {
    names: Vec<String>,
    ids: HashMap<String, u32>,
}

impl Interner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_owned());
        self.ids.insert(name.to_owned(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<u32> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, id: u32) -> Option<&str> {
        self.names.get(id as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

impl FromIterator<String> for Interner {
    fn from_iter<I: IntoIterator<Item = String>>(iter: I) -> Self {
        let mut out = Interner::new();
        for name in iter {
            out.intern(&name);
        }
        out
    }
}

/// One interner per entity kind.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Dictionary {
    pub users: Interner,
    pub items: Interner,
    pub tags: Interner,
}

impl Dictionary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn user(&self, name: &str) -> Option<UserId> {
        self.users.get(name).map(UserId)
    }

    pub fn item(&self, name: &str) -> Option<ItemId> {
        self.items.get(name).map(ItemId)
    }

    pub fn tag(&self, name: &str) -> Option<TagId> {
        self.tags.get(name).map(TagId)
    }

    pub fn user_name(&self, id: UserId) -> &str {
        self.users.name(id.0).unwrap_or("?")
    }

    pub fn item_name(&self, id: ItemId) -> &str {
        self.items.name(id.0).unwrap_or("?")
    }

    pub fn tag_name(&self, id: TagId) -> &str {
        self.tags.name(id.0).unwrap_or("?")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_is_first_seen_order() {
        let mut i = Interner::new();
        assert_eq!(i.intern("b"), 0);
        assert_eq!(i.intern("a"), 1);
        assert_eq!(i.intern("b"), 0);
        assert_eq!(i.name(1), Some("a"));
        assert_eq!(i.get("c"), None);
        assert_eq!(i.len(), 2);
    }
}
