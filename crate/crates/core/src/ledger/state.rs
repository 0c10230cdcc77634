//! Replayed authorization state and the contract rule functions.
//!
//! The state is derivable solely from the chain: folding transactions in
//! order (grants add, revokes remove, records are state-neutral) always
//! produces the same value, and emptied relations are dropped so histories
//! that cancel out compare bit-identical to histories that never happened.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::tx::{Privilege, ResourceKind, Transaction, TxOp};

/// Outcome of a contract rule: allow, or deny with the reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ruling {
    Allow,
    Deny { reason: String },
}

impl Ruling {
    pub fn deny(reason: impl Into<String>) -> Ruling {
        Ruling::Deny {
            reason: reason.into(),
        }
    }

    pub fn is_allow(&self) -> bool {
        matches!(self, Ruling::Allow)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Resource {
    pub kind: ResourceKind,
    pub id: String,
}

/// The user -> role -> privilege relation derived by replaying the chain.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AccessControlState {
    pub users: BTreeSet<String>,
    pub resources: BTreeSet<Resource>,
    pub role_members: BTreeMap<String, BTreeSet<String>>,
    pub role_privileges: BTreeMap<String, BTreeSet<Privilege>>,
    /// Fixed at genesis; never changes afterwards.
    pub super_users: BTreeSet<String>,
}

impl AccessControlState {
    pub fn with_super_users(super_users: BTreeSet<String>) -> AccessControlState {
        AccessControlState {
            super_users,
            ..AccessControlState::default()
        }
    }

    pub fn is_super_user(&self, user: &str) -> bool {
        self.super_users.contains(user)
    }

    fn is_known(&self, user: &str) -> bool {
        self.users.contains(user) || self.super_users.contains(user)
    }

    fn holds_delegate_on(&self, user: &str, role: &str) -> bool {
        self.role_members.iter().any(|(held_role, members)| {
            members.contains(user)
                && self
                    .role_privileges
                    .get(held_role)
                    .is_some_and(|ps| ps.contains(&Privilege::delegate(role)))
        })
    }

    /// Roles the user is a member of, for deny messages and audit summaries.
    pub fn roles_of(&self, user: &str) -> Vec<&str> {
        self.role_members
            .iter()
            .filter(|(_, members)| members.contains(user))
            .map(|(role, _)| role.as_str())
            .collect()
    }
}

/// The contract rule that gates entry into a block. Pure in (state, tx).
///
/// REGISTER_* and ASSIGN/REVOKE_PRIVILEGE require a super-user actor;
/// GRANT/REVOKE_ROLE additionally accept an actor holding DELEGATE on that
/// role; ACCESS/WRITE records are always allowed (they log decisions already
/// made by `check_access` and must be appendable for any subject); any other
/// kind from an unknown actor is denied.
pub fn authorize_tx(state: &AccessControlState, tx: &Transaction) -> Ruling {
    if tx.op.is_record() {
        return Ruling::Allow;
    }
    if !state.is_known(&tx.actor) {
        return Ruling::deny(format!("unknown actor: {}", tx.actor));
    }
    let is_super = state.is_super_user(&tx.actor);
    match &tx.op {
        TxOp::RegisterUser { .. } | TxOp::RegisterResource { .. } => {
            if is_super {
                Ruling::Allow
            } else {
                Ruling::deny(format!("actor {} is not a super-user (registration)", tx.actor))
            }
        }
        TxOp::GrantRole { role, .. } | TxOp::RevokeRole { role, .. } => {
            if is_super || state.holds_delegate_on(&tx.actor, role) {
                Ruling::Allow
            } else {
                Ruling::deny(format!(
                    "actor {} is neither a super-user nor holds DELEGATE on role {role}",
                    tx.actor
                ))
            }
        }
        TxOp::AssignPrivilege { .. } | TxOp::RevokePrivilege { .. } => {
            if is_super {
                Ruling::Allow
            } else {
                Ruling::deny(format!(
                    "actor {} is not a super-user (privilege administration)",
                    tx.actor
                ))
            }
        }
        TxOp::AccessRecord { .. } | TxOp::WriteRecord { .. } => unreachable!("handled above"),
    }
}

/// Fold one transaction into the state. Records are state-neutral; removing
/// the last member of a relation drops the key entirely.
pub fn apply_tx(state: &mut AccessControlState, tx: &Transaction) {
    match &tx.op {
        TxOp::RegisterUser { user } => {
            state.users.insert(user.clone());
        }
        TxOp::RegisterResource {
            resource_kind,
            resource_id,
        } => {
            state.resources.insert(Resource {
                kind: *resource_kind,
                id: resource_id.clone(),
            });
        }
        TxOp::GrantRole { user, role } => {
            state
                .role_members
                .entry(role.clone())
                .or_default()
                .insert(user.clone());
        }
        TxOp::RevokeRole { user, role } => {
            if let Some(members) = state.role_members.get_mut(role) {
                members.remove(user);
                if members.is_empty() {
                    state.role_members.remove(role);
                }
            }
        }
        TxOp::AssignPrivilege { role, privilege } => {
            state
                .role_privileges
                .entry(role.clone())
                .or_default()
                .insert(privilege.clone());
        }
        TxOp::RevokePrivilege { role, privilege } => {
            if let Some(privs) = state.role_privileges.get_mut(role) {
                privs.remove(privilege);
                if privs.is_empty() {
                    state.role_privileges.remove(role);
                }
            }
        }
        TxOp::AccessRecord { .. } | TxOp::WriteRecord { .. } => {}
    }
}

/// Allow iff some role of the user holds a privilege with exactly the
/// requested (action, resource); super-users are allowed everything.
pub fn check_access(state: &AccessControlState, user: &str, requested: &Privilege) -> Ruling {
    if state.is_super_user(user) {
        return Ruling::Allow;
    }
    let allowed = state.role_members.iter().any(|(role, members)| {
        members.contains(user)
            && state
                .role_privileges
                .get(role)
                .is_some_and(|ps| ps.contains(requested))
    });
    if allowed {
        Ruling::Allow
    } else {
        Ruling::deny(format!(
            "no role of user {user} holds {:?} on {}",
            requested.action, requested.resource
        ))
    }
}

pub use super::tx::Decision;

/// Convenience: the recorded decision value for a ruling.
pub fn decision_of(ruling: &Ruling) -> Decision {
    match ruling {
        Ruling::Allow => Decision::Allow,
        Ruling::Deny { .. } => Decision::Deny,
    }
}
