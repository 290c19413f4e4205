# coding: utf-8

# # Polar codes per state bin and a key from noisy cells
#
# The capacity numbers become real rates once every state bin gets its own
# polar code. The same machinery turns a noisy memory array into a stable key.

# In[1]:


from vbsc.capacity import capacity_csi_decoder
from vbsc.fuzzy_extractor import enroll, make_device, required_cells, try_reproduce
from vbsc.polar import plan_binned_codes, run_binned_transmission
from vbsc.state_models import MaesHybrid

maes = MaesHybrid(0.1213, 0.021)


# ## Finer bins, higher rate
#
# Each plan splits 8192 channel uses over state bins. More bins track the
# state better and so carry more bits at the same error rate.

# In[2]:

for n_bins in (4, 8, 16):
    plan = plan_binned_codes(maes, 8192, n_bins, rate_margin=0.05)
    rep = run_binned_transmission(plan, maes, 20, 7)
    print(f"{n_bins:2d} bins  rate {rep.aggregate_rate:.4f}  block errors {rep.block_error_rate:.3f}")


# ## Sizing a device
#
# With the decoder seeing each cell's reliability, 128 key bits need
# a power-of-two array of at least 128 / C cells.

# In[3]:

cap = capacity_csi_decoder(maes).value
n_cells = required_cells(128, cap)
print("capacity", round(cap, 4), "cells", n_cells)


# ## Enroll once, reproduce from a fresh noisy read

# In[4]:

device = make_device(maes, n_cells, 0)
key, helper = enroll(device, 128, 0)
print("helper bytes", len(helper.to_bytes()))
print("key", key.hex()[:32], "...")
print("reproduced", try_reproduce(device, helper, 1) == key)


# ## Reliability tags pay off on undersized arrays
#
# At 256 cells the plain decoder runs close to its capacity and often fails;
# the tagged one rarely does.

# In[5]:

tagged = plain = 0
for i in range(100):
    d = make_device(maes, 256, (5, i))
    k, h = enroll(d, 128, (6, i))
    tagged += try_reproduce(d, h, (7, i)) == k
    plain += try_reproduce(d, h, (7, i), use_tags=False) == k
print("tagged", tagged, "plain", plain, "out of 100")


# ## Another device's helper data is refused

# In[6]:

other = make_device(maes, n_cells, 99)
print("cross-device key", try_reproduce(other, helper, 2))
